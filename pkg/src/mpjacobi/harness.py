"""Accuracy metrics, experiment grids and result emission.

A grid is a list of :class:`Cell` (matrix recipe, algorithm, tolerances).
:func:`run_grid` turns it into :class:`ExperimentRow` records, one per
cell and in input order; :func:`emit` writes them as CSV, a markdown
table or JSON.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .eig import EIG_DEFAULTS, ToleranceConfig, classical_jacobi, cyclic_jacobi, mixed_precision_jacobi
from .errors import DegenerateInput, MPJacobiError
from .matgen import DEFAULT_SEED, Kind, MatGenSpec, generate
from .numcore import frobenius_norm, off_norm
from .svd import SVD_DEFAULTS, mixed_precision_svd, one_sided_jacobi_svd

CSV_COLUMNS = (
    "kind,mode,kappa,n,m,mult,seed,algorithm,res,orth_p,orth_u,orth_v,"
    "ju_ratio,sweeps,ct_seconds,off0,bd,gap_term"
).split(",")


class Algorithm(enum.Enum):
    CLASSICAL = "Classical"
    CYCLIC = "Cyclic"
    MIXED = "Mixed"
    ONE_SIDED_SVD = "OneSidedSVD"
    MIXED_SVD = "MixedSVD"

    @property
    def is_svd(self) -> bool:
        return self in (Algorithm.ONE_SIDED_SVD, Algorithm.MIXED_SVD)

    @property
    def is_mixed(self) -> bool:
        return self in (Algorithm.MIXED, Algorithm.MIXED_SVD)


# ---------------------------------------------------------------------------
# metrics


def _relative(E: np.ndarray, A: np.ndarray) -> float:
    norm_a = frobenius_norm(A)
    if norm_a == 0.0:
        raise DegenerateInput("||A||_F is zero; relative residual undefined")
    return frobenius_norm(E) / norm_a


def residual_eig(A, P, T) -> float:
    """``||A P - P T||_F / ||A||_F`` in float64."""
    A, P, T = (np.asarray(X, dtype=np.float64) for X in (A, P, T))
    if A.shape[0] != A.shape[1] or P.shape != A.shape or T.shape != A.shape:
        raise ValueError(f"shapes do not conform: A {A.shape}, P {P.shape}, T {T.shape}")
    return _relative(A @ P - P @ T, A)


def residual_svd(A, U, sigma, V) -> float:
    """``||A V - U diag(sigma)||_F / ||A||_F`` in float64."""
    A, U, V = (np.asarray(X, dtype=np.float64) for X in (A, U, V))
    sigma = np.asarray(sigma, dtype=np.float64)
    m, n = A.shape
    if U.shape != (m, n) or V.shape != (n, n) or sigma.shape != (n,):
        raise ValueError(f"shapes do not conform: A {A.shape}, U {U.shape}, sigma {sigma.shape}, V {V.shape}")
    return _relative(A @ V - U * sigma, A)


def orth_defect(M) -> float:
    """``||M^T M - I||_F`` in float64 for a square or tall ``M``."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] < M.shape[1]:
        raise ValueError(f"expected a square or tall matrix, got shape {M.shape}")
    return frobenius_norm(M.T @ M - np.eye(M.shape[1]))


# ---------------------------------------------------------------------------
# grid


@dataclass(frozen=True)
class Cell:
    """One experiment: build ``spec``'s matrix and solve it with ``algorithm``."""

    spec: MatGenSpec
    algorithm: Algorithm
    tol: ToleranceConfig | None = None
    orthogonalizer: str = "mgs"
    low_solver: str = "lapack"

    def __post_init__(self):
        if not isinstance(self.algorithm, Algorithm):
            object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        if self.algorithm.is_svd != (self.spec.kind is Kind.RECTANGULAR):
            raise ValueError(f"{self.algorithm.value} does not apply to {self.spec.kind.value} matrices")


@dataclass
class ExperimentRow:
    """Metrics of one solve. Metrics that do not apply (or were not
    reached because the solve failed, see ``error``) are ``None``.
    ``spec`` is ``None`` for matrices that were not generated."""

    spec: MatGenSpec | None
    algorithm: Algorithm
    shape: tuple[int, int] | None = None
    res: float | None = None
    orth_p: float | None = None
    orth_u: float | None = None
    orth_v: float | None = None
    ju_ratio: float | None = None
    sweeps: int | None = None
    wall_seconds: float | None = None
    off0: float | None = None
    bd: float | None = None
    gap_term: float | None = None
    off_input: float | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["spec"] = None if self.spec is None else self.spec.to_string()
        d["algorithm"] = self.algorithm.value
        d["shape"] = None if self.shape is None else list(self.shape)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentRow":
        d = dict(d)
        d["spec"] = None if d["spec"] is None else MatGenSpec.parse(d["spec"])
        d["algorithm"] = Algorithm(d["algorithm"])
        d["shape"] = None if d.get("shape") is None else tuple(d["shape"])
        return cls(**d)

    def csv_record(self) -> dict:
        s = self.spec
        if s is None:
            m, n = self.shape if self.shape is not None else ("", "")
            labels = {"kind": "", "mode": "", "kappa": "", "n": n, "m": m, "mult": "", "seed": ""}
        else:
            labels = {"kind": s.kind.value, "mode": s.mode, "kappa": f"{s.kappa:g}", "n": s.n, "m": s.m,
                      "mult": s.multiplicity, "seed": s.seed}  # fmt: skip
        return {
            **labels,
            "algorithm": self.algorithm.value,
            "res": _fmt(self.res),
            "orth_p": _fmt(self.orth_p),
            "orth_u": _fmt(self.orth_u),
            "orth_v": _fmt(self.orth_v),
            "ju_ratio": _fmt(self.ju_ratio, "{:.4f}"),
            "sweeps": "" if self.sweeps is None else self.sweeps,
            "ct_seconds": _fmt(self.wall_seconds, "{:.4f}"),
            "off0": _fmt(self.off0),
            "bd": _fmt(self.bd),
            "gap_term": _fmt(self.gap_term),
        }


def _fmt(x, pattern="{:.6e}") -> str:
    return "" if x is None else pattern.format(x)


def solve_matrix(
    A,
    algorithm: Algorithm,
    tol: ToleranceConfig | None = None,
    orthogonalizer: str = "mgs",
    low_solver: str = "lapack",
    spec: MatGenSpec | None = None,
):
    """Solve ``A`` with ``algorithm`` and return ``(row, result)``.

    ``result`` is the solver's :class:`~mpjacobi.eig.SymEigResult` or
    :class:`~mpjacobi.svd.SvdResult`, or ``None`` when the solver raised;
    the error is then recorded in ``row.error`` instead of propagating.
    ``spec`` only labels the row.
    """
    algo = Algorithm(algorithm)
    A = np.asarray(A)
    row = ExperimentRow(spec=spec, algorithm=algo, shape=tuple(A.shape))
    try:
        if algo.is_svd:
            tol = tol or SVD_DEFAULTS
            if algo is Algorithm.MIXED_SVD:
                out = mixed_precision_svd(A, tol, orthogonalizer, low_solver)
            else:
                out = one_sided_jacobi_svd(A, tol)
            row.res = residual_svd(A, out.U, out.sigma, out.V)
            row.orth_u = orth_defect(out.U)
            row.orth_v = orth_defect(out.V)
        else:
            tol = tol or EIG_DEFAULTS
            if algo is Algorithm.MIXED:
                out = mixed_precision_jacobi(A, tol, orthogonalizer, low_solver)
            elif algo is Algorithm.CYCLIC:
                out = cyclic_jacobi(A, tol)
            else:
                out = classical_jacobi(A, tol)
            row.res = residual_eig(A, out.P, out.T)
            row.orth_p = orth_defect(out.P)
            row.off_input = off_norm(A)
    except MPJacobiError as exc:
        row.error = f"{type(exc).__name__}: {exc}"
        return row, None
    rep = out.report
    row.ju_ratio = rep.ju_ratio
    row.sweeps = rep.sweeps
    row.wall_seconds = rep.wall_seconds
    if algo.is_mixed:
        row.off0 = rep.off0
        row.bd = rep.bd
    return row, out


def solve_cell(cell: Cell):
    """Generate the cell's matrix and solve it; see :func:`solve_matrix`."""
    A, truth = generate(cell.spec)
    row, out = solve_matrix(A, cell.algorithm, cell.tol, cell.orthogonalizer, cell.low_solver, spec=cell.spec)
    if math.isfinite(truth.gap):
        row.gap_term = truth.gap / (4 * math.sqrt(2))
    return row, out


def run_cell(cell: Cell) -> ExperimentRow:
    """Metrics row for one cell; see :func:`solve_cell`."""
    return solve_cell(cell)[0]


def run_grid(grid, jobs: int = 1) -> list[ExperimentRow]:
    """Run every cell; rows come back in grid order whatever ``jobs`` is.

    Entries may be :class:`Cell` or ``(spec, algorithm[, tol])`` tuples.
    ``jobs > 1`` runs cells in that many worker processes.
    """
    cells = [c if isinstance(c, Cell) else Cell(*c) for c in grid]
    if jobs <= 1 or len(cells) <= 1:
        return [run_cell(c) for c in cells]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_cell, cells))


# ---------------------------------------------------------------------------
# presets

KAPPAS_TABLE = (1e3, 1e4, 1e5, 1e6)


def _seeded(specs, seed_base):
    return [s.with_seed(seed_base + k) for k, s in enumerate(specs)]


def preset_table1(n: int = 256, seed_base: int = DEFAULT_SEED) -> list[Cell]:
    """Modes 3-5 x kappa 1e3..1e6, cyclic against mixed, on the same matrices."""
    specs = _seeded([MatGenSpec(Kind.SYMMETRIC_PD, mode, k, n) for mode in (3, 4, 5) for k in KAPPAS_TABLE], seed_base)
    return [Cell(s, a) for s in specs for a in (Algorithm.CYCLIC, Algorithm.MIXED)]


def preset_table8(n: int = 256, seed_base: int = DEFAULT_SEED) -> list[Cell]:
    """``n x n/2`` rectangular matrices, modes 3-5 x kappa 1e3..1e6, plain against mixed SVD."""
    cols = max(n // 2, 1)
    specs = _seeded(
        [MatGenSpec(Kind.RECTANGULAR, mode, k, cols, rows=n) for mode in (3, 4, 5) for k in KAPPAS_TABLE], seed_base
    )
    return [Cell(s, a) for s in specs for a in (Algorithm.ONE_SIDED_SVD, Algorithm.MIXED_SVD)]


def _sizes(n: int) -> list[int]:
    sizes = [s for s in (64, 128, 256, 512, 1024, 2048) if s <= n]
    if not sizes or sizes[-1] != n:
        sizes.append(n)
    return sizes


def preset_fig1(n: int = 256, seed_base: int = DEFAULT_SEED) -> list[Cell]:
    """Mixed solver on modes 1-5 with kappa 1e8, sizes from 64 doubling up to ``n``."""
    specs = _seeded([MatGenSpec(Kind.SYMMETRIC_PD, mode, 1e8, s) for s in _sizes(n) for mode in range(1, 6)], seed_base)
    return [Cell(s, Algorithm.MIXED) for s in specs]


def preset_fig2(n: int = 256, seed_base: int = DEFAULT_SEED) -> list[Cell]:
    """Modes 4 and 5 with kappa 1e8 over the same sizes; rows carry ``off(A)`` as well."""
    specs = _seeded([MatGenSpec(Kind.SYMMETRIC_PD, mode, 1e8, s) for s in _sizes(n) for mode in (4, 5)], seed_base)
    return [Cell(s, Algorithm.MIXED) for s in specs]


PRESETS = {"table1": preset_table1, "table8": preset_table8, "fig1": preset_fig1, "fig2": preset_fig2}


# ---------------------------------------------------------------------------
# emission

FORMATS = ("csv", "markdown", "json")


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow(r.csv_record())
    return buf.getvalue()


def _md(x, pattern="{:.2e}") -> str:
    return "-" if x is None else pattern.format(x)


def rows_to_markdown(rows) -> str:
    """One line per row, laid out like the published result tables."""
    head = ["kind", "mode", "kappa", "size", "Algorithm", "Res.", "OR-P.", "OR-U.", "OR-V.", "JU.", "SP.", "CT.",
            "off0", "bd", "d/(4sqrt2)", "status"]  # fmt: skip
    lines = ["| " + " | ".join(head) + " |", "|" + "|".join("---" for _ in head) + "|"]
    for r in rows:
        s = r.spec
        if s is None:
            labels = ["-", "-", "-", "x".join(map(str, r.shape or ()))]
        else:
            size = f"{s.m}x{s.n}" if s.kind is Kind.RECTANGULAR else str(s.n)
            labels = [s.kind.value, str(s.mode), f"{s.kappa:.0e}", size]
        cells = [
            *labels,
            r.algorithm.value,
            _md(r.res),
            _md(r.orth_p),
            _md(r.orth_u),
            _md(r.orth_v),
            "-" if r.ju_ratio is None else f"{r.ju_ratio:.2f}N",
            _md(r.sweeps, "{}"),
            _md(r.wall_seconds, "{:.2f}"),
            _md(r.off0),
            _md(r.bd),
            _md(r.gap_term),
            "ok" if r.error is None else r.error.split(":")[0],
        ]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def rows_to_json(rows) -> str:
    return json.dumps([r.to_dict() for r in rows], indent=2) + "\n"


def rows_from_json(text: str) -> list[ExperimentRow]:
    return [ExperimentRow.from_dict(d) for d in json.loads(text)]


_WRITERS = {"csv": rows_to_csv, "markdown": rows_to_markdown, "json": rows_to_json}


def emit(rows, fmt: str = "csv", destination=None) -> str:
    """Render ``rows`` as ``fmt`` and write to ``destination`` (path or file
    object; stdout when ``None``). Returns the rendered text."""
    try:
        text = _WRITERS[fmt](rows)
    except KeyError:
        raise ValueError(f"unknown format {fmt!r}; choose from {list(FORMATS)}") from None
    if destination is None:
        sys.stdout.write(text)
    elif hasattr(destination, "write"):
        destination.write(text)
    else:
        path = Path(destination)
        try:
            path.write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write results to {path}: {exc.strerror or exc}") from exc
    return text

