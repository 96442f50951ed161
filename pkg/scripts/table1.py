"""Cyclic against mixed-precision Jacobi on symmetric positive definite
matrices (modes 3-5, kappa 1e3..1e6), reporting sweeps and rotations per N.

    python3 scripts/table1.py --n 256
"""

from _common import parse_args, run_preset

from mpjacobi.harness import emit

if __name__ == "__main__":
    rows = run_preset(parse_args("table1", 256, __doc__))
    emit(rows, "markdown")
