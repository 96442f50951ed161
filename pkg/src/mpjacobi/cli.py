"""Command-line front end: ``mpjacobi {eig,svd,bench,gen} ...``.

Exit status is 0 on success, 1 for usage errors and 2 when a solver
fails (the error class name is printed on stderr).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .eig import EIG_DEFAULTS, STOP_RULES, ToleranceConfig
from .harness import FORMATS, PRESETS, Algorithm, emit, run_grid, solve_matrix
from .matgen import DEFAULT_SEED, Kind, MatGenSpec, generate
from .numcore import is_symmetric, load_matrix, save_matrix
from .orth import ORTHOGONALIZERS
from .svd import SVD_DEFAULTS

SEED_ENV = "MPJACOBI_SEED"

EIG_ALGOS = {"classical": Algorithm.CLASSICAL, "cyclic": Algorithm.CYCLIC, "mixed": Algorithm.MIXED}
SVD_ALGOS = {"onesided": Algorithm.ONE_SIDED_SVD, "mixed": Algorithm.MIXED_SVD}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def default_seed() -> int:
    value = os.environ.get(SEED_ENV)
    if value is None or value == "":
        return DEFAULT_SEED
    try:
        return int(value, 0)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {value!r}") from None


def _add_output(p):
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.add_argument("--out", metavar="PATH", help="write results here instead of stdout")


def _add_solver(p, algos, defaults: ToleranceConfig):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--spec", help="kind:mode:kappa:n[:m][:mult][:seed]")
    src.add_argument("--load", metavar="PATH", help="solve the matrix stored in PATH instead of generating one")
    p.add_argument("--algo", required=True, choices=sorted(algos))
    p.add_argument("--orth", choices=sorted(ORTHOGONALIZERS), default="mgs")
    p.add_argument("--low-solver", choices=("lapack", "jacobi"), default="lapack")
    p.add_argument("--eps-factor", type=float, default=defaults.eps_factor)
    p.add_argument("--nu-factor", type=float, default=defaults.nu_factor)
    p.add_argument("--max-sweeps", type=int, default=defaults.max_sweeps)
    p.add_argument("--dump", metavar="PATH", help="write the input matrix to PATH in the plain-text matrix format")
    p.add_argument("--history", metavar="PATH", help="write computed values and convergence history as JSON")
    _add_output(p)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mpjacobi", description="Mixed-precision Jacobi eigenvalue and singular value solvers.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("eig", help="symmetric eigendecomposition")
    _add_solver(p, EIG_ALGOS, EIG_DEFAULTS)
    p.add_argument("--stop-rule", choices=sorted(STOP_RULES), default=EIG_DEFAULTS.stop_rule)

    p = sub.add_parser("svd", help="singular value decomposition")
    _add_solver(p, SVD_ALGOS, SVD_DEFAULTS)
    p.add_argument("--early-stop-ratio", type=float, default=SVD_DEFAULTS.early_stop_ratio)

    p = sub.add_parser("bench", help="run a preset experiment grid")
    p.add_argument("--preset", required=True, choices=sorted(PRESETS))
    p.add_argument("--n", type=int, default=256, help="problem size (rows for table8)")
    p.add_argument("--seed-base", type=int, default=None, help=f"first seed (default: ${SEED_ENV} or {DEFAULT_SEED})")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    _add_output(p)

    p = sub.add_parser("gen", help="write a generated matrix and its exact spectrum")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True, metavar="PATH", help="matrix file; the spectrum goes to PATH.spectrum")
    return parser


def _parse_spec(text: str, kinds) -> MatGenSpec:
    try:
        spec = MatGenSpec.parse(text, default_seed=default_seed())
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if spec.kind not in kinds:
        raise UsageError(f"matrix kind {spec.kind.value!r} not valid here; expected one of {[k.value for k in kinds]}")
    return spec


def _tolerances(args, svd: bool) -> ToleranceConfig:
    try:
        return ToleranceConfig(
            eps_factor=args.eps_factor,
            nu_factor=args.nu_factor,
            max_sweeps=args.max_sweeps,
            stop_rule=getattr(args, "stop_rule", "min"),
            early_stop_ratio=args.early_stop_ratio if svd else None,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _write_history(path, result) -> None:
    rep = result.report
    values = result.sigma if hasattr(result, "sigma") else result.eigenvalues
    payload = {
        "values": [float(v) for v in values],
        "off_history": rep.off_history,
        "sweep_rotations": rep.sweep_rotations,
        "rotations": rep.rotations,
        "sweeps": rep.sweeps,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)


def _solve(args, svd: bool) -> int:
    algo = (SVD_ALGOS if svd else EIG_ALGOS)[args.algo]
    tol = _tolerances(args, svd)
    if args.load:
        spec = None
        try:
            A = load_matrix(args.load)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if svd and A.shape[0] < A.shape[1]:
            raise UsageError(f"svd needs rows >= cols, {args.load} is {A.shape[0]}x{A.shape[1]}")
        if not svd and not is_symmetric(A):
            raise UsageError(f"eig needs a symmetric matrix, {args.load} is not")
        gap = None
    else:
        kinds = (Kind.RECTANGULAR,) if svd else (Kind.SYMMETRIC_PD, Kind.SYMMETRIC_MULTIPLE)
        spec = _parse_spec(args.spec, kinds)
        A, truth = generate(spec)
        gap = truth.gap
    if args.dump:
        save_matrix(args.dump, A)
    row, result = solve_matrix(A, algo, tol, args.orth, args.low_solver, spec=spec)
    if gap is not None and math.isfinite(gap):
        row.gap_term = gap / (4 * math.sqrt(2))
    emit([row], args.format, args.out)
    if row.error is not None:
        print(row.error, file=sys.stderr)
        return 2
    if args.history:
        _write_history(args.history, result)
    return 0


def _bench(args) -> int:
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    seed_base = args.seed_base if args.seed_base is not None else default_seed()
    grid = PRESETS[args.preset](args.n, seed_base)
    rows = run_grid(grid, jobs=args.jobs)
    emit(rows, args.format, args.out)
    failed = [r.error for r in rows if r.error is not None]
    for err in failed:
        print(err, file=sys.stderr)
    return 2 if failed else 0


def _gen(args) -> int:
    spec = _parse_spec(args.spec, tuple(Kind))
    A, truth = generate(spec)
    save_matrix(args.out, A)
    save_matrix(f"{args.out}.spectrum", np.asarray(truth.spectrum).reshape(-1, 1))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            raise UsageError("a subcommand is required")
        if args.command == "eig":
            return _solve(args, svd=False)
        if args.command == "svd":
            return _solve(args, svd=True)
        if args.command == "bench":
            return _bench(args)
        return _gen(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"mpjacobi: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
