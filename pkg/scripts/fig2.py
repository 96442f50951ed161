"""Off-diagonal mass before and after the low-precision preconditioning on
modes 4 and 5 at kappa 1e8: off(A) of the input against off(Q^T A Q).

Prints plot-ready columns: n mode off_input off0 reduction.

    python3 scripts/fig2.py --n 512
"""

from _common import parse_args, run_preset

if __name__ == "__main__":
    rows = run_preset(parse_args("fig2", 256, __doc__))
    print(f"{'n':>6} {'mode':>4} {'off_input':>14} {'off0':>14} {'reduction':>10}")
    for r in rows:
        if r.error:
            continue
        print(f"{r.spec.n:>6} {r.spec.mode:>4} {r.off_input:>14.6e} {r.off0:>14.6e} {r.off_input / r.off0:>10.2e}")
