"""Jacobi eigensolvers for real symmetric matrices.

Three drivers share one set of compiled kernels:

* :func:`classical_jacobi` -- largest off-diagonal pivot each step;
* :func:`cyclic_jacobi` -- row-cyclic sweeps with a threshold test;
* :func:`mixed_precision_jacobi` -- a float32 eigensolve, float64
  re-orthogonalization of its eigenvectors, then cyclic sweeps started
  from that near-diagonal matrix.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import rotations
from .errors import NoConvergence
from .matgen import spectral_gap
from .numcore import (
    UNIT_ROUNDOFF_LOW,
    Precision,
    cast_precision,
    frobenius_norm,
    off_norm,
    symmetrize,
)
from .orth import orthogonalize

__all__ = [
    "ToleranceConfig",
    "SolveReport",
    "SymEigResult",
    "classical_jacobi",
    "cyclic_jacobi",
    "low_precision_eig",
    "lapack_low_precision_eig",
    "mixed_precision_jacobi",
    "spectral_gap",
    "estimate_norm2",
    "EIG_DEFAULTS",
    "LOW_EIG_TOL",
]

STOP_RULES = {"min": rotations.STOP_MIN_DIAG, "geomean": rotations.STOP_GEOMEAN_DIAG}


@dataclass(frozen=True)
class ToleranceConfig:
    """Stopping tolerance and pivot threshold, as multiples of the unit roundoff.

    The unit roundoff is that of the matrix being iterated on, so the same
    config means ``eps = eps_factor * 2**-53`` for a float64 solve and
    ``eps_factor * 2**-24`` for a float32 one.

    ``stop_rule`` selects the threshold test: ``"min"`` skips pivots with
    ``|a_ij| <= nu * min(|a_ii|, |a_jj|)``, ``"geomean"`` uses
    ``nu * sqrt(|a_ii a_jj|)`` instead. ``early_stop_ratio`` only applies
    to the one-sided SVD: iteration ends after a sweep whose applied
    rotations number fewer than ``early_stop_ratio * n(n-1)/2``.
    """

    eps_factor: float = 0.1
    nu_factor: float = 20.0
    max_sweeps: int = 60
    stop_rule: str = "min"
    early_stop_ratio: float | None = None

    def __post_init__(self):
        if not self.eps_factor > 0:
            raise ValueError("eps_factor must be positive")
        if not self.nu_factor >= 0:
            raise ValueError("nu_factor must be non-negative")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        if self.stop_rule not in STOP_RULES:
            raise ValueError(f"stop_rule must be one of {sorted(STOP_RULES)}")
        if self.early_stop_ratio is not None and self.early_stop_ratio < 0:
            raise ValueError("early_stop_ratio must be non-negative")

    def eps(self, precision: Precision) -> float:
        return self.eps_factor * precision.unit_roundoff

    def nu(self, precision: Precision) -> float:
        return self.nu_factor * precision.unit_roundoff


EIG_DEFAULTS = ToleranceConfig(eps_factor=0.1, nu_factor=20.0)
LOW_EIG_TOL = ToleranceConfig(eps_factor=10.0, nu_factor=20.0)


@dataclass
class SolveReport:
    """Convergence telemetry for one solve.

    ``off_history`` holds the convergence functional at every sweep
    boundary, starting with the value before the first sweep;
    ``sweep_rotations`` the number of rotations applied in each sweep.
    """

    rotations: int = 0
    sweeps: int = 0
    off_history: list[float] = field(default_factory=list)
    sweep_rotations: list[int] = field(default_factory=list)
    wall_seconds: float = 0.0
    ju_ratio: float = 0.0
    off0: float | None = None
    bd: float | None = None
    norm2: float | None = None
    precondition_seconds: float | None = None
    early_stopped: bool = False


@dataclass
class SymEigResult:
    P: np.ndarray
    T: np.ndarray
    eigenvalues: np.ndarray
    report: SolveReport


def _pairs(n: int) -> int:
    return n * (n - 1) // 2


def _check_square(A):
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")


def _working_copy(A) -> np.ndarray:
    A = np.asarray(A)
    _check_square(A)
    if A.dtype not in (np.float32, np.float64):
        A = A.astype(np.float64)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return symmetrize(np.array(A, order="F"))


def estimate_norm2(A: np.ndarray, iterations: int = 20) -> float:
    """Spectral norm estimate from ``iterations`` power steps (on ``A^T A`` if not square).

    Deterministic: the start vector is a fixed seeded Gaussian.
    """
    X = np.asarray(A, dtype=np.float64)
    x = np.random.Generator(np.random.PCG64(0)).standard_normal(X.shape[1])
    x /= np.linalg.norm(x)
    est = 0.0
    symmetric = X.shape[0] == X.shape[1] and np.array_equal(X, X.T)
    for _ in range(iterations):
        y = X @ x if symmetric else X.T @ (X @ x)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        est = ny
        x = y / ny
    return float(est if symmetric else np.sqrt(est))


def _cyclic_loop(T, P, tol: ToleranceConfig, norm_a: float, report: SolveReport) -> None:
    precision = Precision.of(T)
    ft = T.dtype.type
    sweep = rotations.kernels(T.dtype)["cyclic_sweep"]
    target = tol.eps(precision) * norm_a
    nu = ft(tol.nu(precision))
    rule = STOP_RULES[tol.stop_rule]
    while True:
        off = off_norm(T)
        report.off_history.append(off)
        if off <= target:
            return
        if report.sweeps >= tol.max_sweeps:
            raise NoConvergence(
                f"cyclic Jacobi: off-norm {off:.3e} > {target:.3e} after {report.sweeps} sweeps", report
            )
        applied = sweep(T, P, nu, rule)
        report.sweep_rotations.append(applied)
        report.rotations += applied
        report.sweeps += 1


def _finish(report: SolveReport, n: int, start: float) -> None:
    report.wall_seconds = time.perf_counter() - start
    N = _pairs(n)
    report.ju_ratio = report.rotations / N if N else 0.0


def cyclic_jacobi(A, tol: ToleranceConfig = EIG_DEFAULTS, P0: np.ndarray | None = None) -> SymEigResult:
    """Row-cyclic threshold Jacobi.

    Works in the precision of ``A`` (float32 or float64). Pivots in
    order ``(0,1), (0,2), ..., (n-2,n-1)``; a pivot passing the threshold
    test is set to zero instead of rotated. Rotations are accumulated
    into ``P0`` (identity if omitted).

    Raises :class:`NoConvergence` after ``tol.max_sweeps`` sweeps.
    """
    start = time.perf_counter()
    T = _working_copy(A)
    n = T.shape[0]
    if P0 is None:
        P = np.eye(n, dtype=T.dtype, order="F")
    else:
        P = np.array(P0, dtype=T.dtype, order="F")
        if P.shape != (n, n):
            raise ValueError(f"P0 has shape {P.shape}, expected {(n, n)}")
    report = SolveReport()
    _cyclic_loop(T, P, tol, frobenius_norm(T), report)
    _finish(report, n, start)
    return SymEigResult(P=P, T=T, eigenvalues=np.diag(T).copy(), report=report)


def classical_jacobi(A, tol: ToleranceConfig = EIG_DEFAULTS) -> SymEigResult:
    """Classical Jacobi: each step annihilates a largest ``|a_pq|``.

    Ties go to the lexicographically smallest ``(p, q)``. ``off_history``
    is sampled every ``n(n-1)/2`` rotations. Raises
    :class:`NoConvergence` after ``tol.max_sweeps * n(n-1)/2`` rotations.
    """
    start = time.perf_counter()
    T = _working_copy(A)
    n = T.shape[0]
    P = np.eye(n, dtype=T.dtype, order="F")
    report = SolveReport()
    N = _pairs(n)
    if N == 0:
        report.off_history.append(0.0)
        _finish(report, n, start)
        return SymEigResult(P=P, T=T, eigenvalues=np.diag(T).copy(), report=report)
    target = tol.eps(Precision.of(T)) * frobenius_norm(T)
    history = np.zeros(tol.max_sweeps + 2)
    done, nrec, ok = rotations.kernels(T.dtype)["classical_run"](T, P, target, tol.max_sweeps * N, history, N)
    report.rotations = int(done)
    report.sweeps = -(-report.rotations // N)
    report.off_history = [float(h) for h in history[:nrec]]
    if not ok:
        raise NoConvergence(f"classical Jacobi: no convergence in {done} rotations", report)
    _finish(report, n, start)
    return SymEigResult(P=P, T=T, eigenvalues=np.diag(T).copy(), report=report)


def low_precision_eig(A, tol: ToleranceConfig = LOW_EIG_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Approximate eigenvectors ``Z`` and eigenvalues ``d`` computed entirely in float32.

    Threshold cyclic Jacobi on ``A`` rounded to binary32. ``Z`` is float32.
    """
    A32 = cast_precision(_working_copy(A), Precision.LOW)
    res = cyclic_jacobi(A32, tol)
    return res.P, res.eigenvalues


def lapack_low_precision_eig(A) -> tuple[np.ndarray, np.ndarray]:
    """Float32 symmetric eigensolve through ``numpy.linalg.eigh`` (LAPACK ``ssyevd``)."""
    A32 = cast_precision(_working_copy(A), Precision.LOW)
    d, Z = np.linalg.eigh(A32)
    return np.asfortranarray(Z), d


LowSolver = Callable[[np.ndarray], "tuple[np.ndarray, np.ndarray]"]

LOW_EIG_SOLVERS: dict[str, LowSolver] = {"lapack": lapack_low_precision_eig, "jacobi": low_precision_eig}


def resolve_low_solver(low_solver, registry: dict) -> LowSolver:
    if callable(low_solver):
        return low_solver
    try:
        return registry[low_solver]
    except KeyError:
        raise ValueError(f"unknown low-precision solver {low_solver!r}; choose from {sorted(registry)}") from None


def mixed_precision_jacobi(
    A,
    tol: ToleranceConfig = EIG_DEFAULTS,
    orthogonalizer: str = "mgs",
    low_solver: str | LowSolver = "lapack",
) -> SymEigResult:
    """Mixed-precision Jacobi eigensolver.

    1. ``Z`` from a float32 eigensolver: ``"lapack"`` (``ssyevd`` via
       numpy, the default), ``"jacobi"`` (:func:`low_precision_eig`) or
       any callable returning ``(Z, d)``;
    2. ``Q`` = ``orthogonalizer`` applied to ``Z`` in float64;
    3. ``T0 = Q^T A Q`` in float64, symmetrized;
    4. cyclic Jacobi on ``T0`` accumulating into ``Q``.

    The report also carries ``off0 = ||off(T0)||_F`` and
    ``bd = n * ||A||_2 * 2**-24`` (``||A||_2`` by power iteration).
    """
    start = time.perf_counter()
    solve_low = resolve_low_solver(low_solver, LOW_EIG_SOLVERS)
    A64 = _working_copy(np.asarray(A, dtype=np.float64))
    n = A64.shape[0]
    Z, _ = solve_low(A64)
    Q = orthogonalize(cast_precision(np.asarray(Z), Precision.HIGH), orthogonalizer)
    T = symmetrize(Q.T @ A64 @ Q)
    report = SolveReport()
    report.off0 = off_norm(T)
    report.norm2 = estimate_norm2(A64)
    report.bd = n * report.norm2 * UNIT_ROUNDOFF_LOW
    report.precondition_seconds = time.perf_counter() - start
    P = np.asfortranarray(Q)
    _cyclic_loop(T, P, tol, frobenius_norm(A64), report)
    _finish(report, n, start)
    return SymEigResult(P=P, T=T, eigenvalues=np.diag(T).copy(), report=report)
