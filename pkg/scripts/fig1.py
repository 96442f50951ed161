"""Quality of the low-precision starting point: off(Q^T A Q) after the
float32 solve and float64 re-orthogonalization, against the rounding bound
n ||A||_2 2^-24 and the quadratic-regime threshold d(A) / (4 sqrt 2), for
modes 1-5 at kappa 1e8 and growing n.

Prints plot-ready columns: n mode off0 bd gap_term.

    python3 scripts/fig1.py --n 512
"""

from _common import parse_args, run_preset


def _g(x):
    return "nan" if x is None else f"{x:.6e}"


if __name__ == "__main__":
    rows = run_preset(parse_args("fig1", 256, __doc__))
    print(f"{'n':>6} {'mode':>4} {'off0':>14} {'bd':>14} {'gap_term':>14}")
    for r in rows:
        print(f"{r.spec.n:>6} {r.spec.mode:>4} {_g(r.off0):>14} {_g(r.bd):>14} {_g(r.gap_term):>14}")
    ok = all(r.off0 is not None and r.off0 <= r.bd for r in rows)
    print("off0 <= bd in every cell:", ok)
