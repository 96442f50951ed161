"""Plain against mixed-precision one-sided Jacobi SVD on n x n/2 matrices
(modes 3-5, kappa 1e3..1e6).

    python3 scripts/table8.py --n 256
"""

from _common import parse_args, run_preset

from mpjacobi.harness import emit

if __name__ == "__main__":
    rows = run_preset(parse_args("table8", 256, __doc__))
    emit(rows, "markdown")
