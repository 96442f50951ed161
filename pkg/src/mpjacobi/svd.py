"""One-sided (Hestenes) Jacobi SVD and its mixed-precision variant."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import rotations
from .eig import SolveReport, ToleranceConfig, estimate_norm2, resolve_low_solver
from .errors import NoConvergence, RankDeficient
from .numcore import UNIT_ROUNDOFF_LOW, Precision, cast_precision, frobenius_norm, off_norm
from .orth import orthogonalize

SVD_DEFAULTS = ToleranceConfig(eps_factor=0.1, nu_factor=1.0, early_stop_ratio=2e-4)
LOW_SVD_TOL = ToleranceConfig(eps_factor=10.0, nu_factor=1.0, early_stop_ratio=2e-4)

# A sweep that leaves more than this fraction of off(C^T C) behind is treated as
# stalled. Genuine sweeps on the generator families shrink it by 0.55 or better;
# once it sits at the float64 rounding floor the ratio jumps to 0.7..1.0.
STALL_RATIO = 0.9


@dataclass
class SvdResult:
    """``A V = U diag(sigma)`` with ``sigma`` non-increasing."""

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray
    report: SolveReport


def gram_off_norm(C: np.ndarray) -> tuple[float, float]:
    """``(||off(C^T C)||_F, ||C^T C||_F)`` evaluated in float64."""
    X = np.asarray(C, dtype=np.float64)
    G = X.T @ X
    return off_norm(G), frobenius_norm(G)


def _check_tall(A):
    if A.ndim != 2 or A.shape[0] < A.shape[1]:
        raise ValueError(f"expected an m x n matrix with m >= n, got shape {A.shape}")


def _one_sided_loop(C, V, tol: ToleranceConfig, report: SolveReport) -> None:
    precision = Precision.of(C)
    n = C.shape[1]
    N = n * (n - 1) // 2
    sweep = rotations.kernels(C.dtype)["one_sided_sweep"]
    nu = C.dtype.type(tol.nu(precision))
    eps = tol.eps(precision)
    while True:
        off, total = gram_off_norm(C)
        report.off_history.append(off)
        if N == 0 or off <= eps * total:
            return
        if report.early_stopped:
            return
        stalled = len(report.off_history) > 1 and off > STALL_RATIO * report.off_history[-2]
        if tol.early_stop_ratio is not None and stalled:
            # the remaining pivots are rounding noise re-created by the rotations
            report.early_stopped = True
            return
        if report.sweeps >= tol.max_sweeps:
            raise NoConvergence(
                f"one-sided Jacobi: off(C^T C) {off:.3e} > {eps * total:.3e} after {report.sweeps} sweeps", report
            )
        applied = sweep(C, V, nu)
        report.sweep_rotations.append(applied)
        report.rotations += applied
        report.sweeps += 1
        if tol.early_stop_ratio is not None and applied < tol.early_stop_ratio * N:
            report.early_stopped = True


def _extract(A, C, V, report: SolveReport, check_rank: bool = True) -> SvdResult:
    n = C.shape[1]
    sigma = np.sqrt(np.einsum("ij,ij->j", C.astype(np.float64), C.astype(np.float64)))
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    if check_rank and n and sigma[-1] <= n * Precision.of(C).unit_roundoff * frobenius_norm(A):
        raise RankDeficient(f"smallest column norm {sigma[-1]:.3e} is at roundoff level")
    C = C[:, order]
    U = np.asfortranarray(C / sigma.astype(C.dtype)) if n else C
    return SvdResult(U=U, sigma=sigma, V=np.asfortranarray(V[:, order]), report=report)


def one_sided_jacobi_svd(A, tol: ToleranceConfig = SVD_DEFAULTS, V0: np.ndarray | None = None) -> SvdResult:
    """Row-cyclic one-sided Jacobi SVD in the precision of ``A``.

    The working matrix is ``C = A V0`` (``V0`` defaults to the identity).
    Pivot ``(i, j)`` is rotated when ``|c_i^T c_j| > nu ||c_i|| ||c_j||``;
    Gram entries are recomputed from the columns at every visit. Sweeps
    stop when ``||off(C^T C)||_F <= eps ||C^T C||_F`` or, if
    ``tol.early_stop_ratio`` is set, after a sweep applying fewer than
    ``early_stop_ratio * n(n-1)/2`` rotations or one that removed less than 10% of
    ``||off(C^T C)||_F`` (the rounding floor has been reached).

    Raises :class:`RankDeficient` if a final column norm is at roundoff
    level relative to ``||A||_F``, :class:`NoConvergence` when the sweep
    budget runs out.
    """
    start = time.perf_counter()
    A = np.asarray(A)
    _check_tall(A)
    if A.dtype not in (np.float32, np.float64):
        A = A.astype(np.float64)
    n = A.shape[1]
    if V0 is None:
        V = np.eye(n, dtype=A.dtype, order="F")
        C = np.array(A, order="F")
    else:
        V = np.array(V0, dtype=A.dtype, order="F")
        if V.shape != (n, n):
            raise ValueError(f"V0 has shape {V.shape}, expected {(n, n)}")
        C = np.asfortranarray(A @ V)
    report = SolveReport()
    _one_sided_loop(C, V, tol, report)
    result = _extract(A, C, V, report)
    report.wall_seconds = time.perf_counter() - start
    N = n * (n - 1) // 2
    report.ju_ratio = report.rotations / N if N else 0.0
    return result


def low_precision_svd(A, tol: ToleranceConfig = LOW_SVD_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Approximate right singular vectors ``Z`` (float32) and singular values.

    One-sided Jacobi on ``A`` rounded to binary32. No rank check is
    made: tiny singular values are expected to be inaccurate here.
    """
    A = np.asarray(A)
    _check_tall(A)
    A32 = cast_precision(np.asfortranarray(A), Precision.LOW)
    n = A32.shape[1]
    C = A32.copy(order="F")
    V = np.eye(n, dtype=np.float32, order="F")
    report = SolveReport()
    _one_sided_loop(C, V, tol, report)
    res = _extract(A32, C, V, report, check_rank=False)
    return res.V, res.sigma


def lapack_low_precision_svd(A) -> tuple[np.ndarray, np.ndarray]:
    """Float32 SVD through ``numpy.linalg.svd`` (LAPACK ``sgesdd``); returns ``(V, sigma)``."""
    A = np.asarray(A)
    _check_tall(A)
    A32 = cast_precision(np.asfortranarray(A), Precision.LOW)
    _, s, vt = np.linalg.svd(A32, full_matrices=False)
    return np.asfortranarray(vt.T), s


LOW_SVD_SOLVERS = {"lapack": lapack_low_precision_svd, "jacobi": low_precision_svd}


def mixed_precision_svd(
    A,
    tol: ToleranceConfig = SVD_DEFAULTS,
    orthogonalizer: str = "mgs",
    low_solver="lapack",
) -> SvdResult:
    """Mixed-precision one-sided Jacobi SVD.

    ``Z`` from a float32 SVD (``"lapack"``: ``sgesdd`` via numpy, the
    default; ``"jacobi"``: :func:`low_precision_svd`; or a callable
    returning ``(Z, sigma)``), ``Q`` = ``orthogonalizer(Z)`` in
    float64, then one-sided Jacobi on ``C = A Q`` with ``V`` seeded at
    ``Q``. The report's ``off0`` is ``||off(Q^T A^T A Q)||_F`` and ``bd``
    is ``n ||A||_2^2 2**-24``.
    """
    start = time.perf_counter()
    A64 = np.asarray(A, dtype=np.float64)
    _check_tall(A64)
    n = A64.shape[1]
    Z, _ = resolve_low_solver(low_solver, LOW_SVD_SOLVERS)(A64)
    Q = orthogonalize(cast_precision(np.asarray(Z), Precision.HIGH), orthogonalizer)
    C = np.asfortranarray(A64 @ Q)
    V = np.asfortranarray(Q)
    report = SolveReport()
    report.off0 = gram_off_norm(C)[0]
    report.norm2 = estimate_norm2(A64)
    report.bd = n * report.norm2**2 * UNIT_ROUNDOFF_LOW
    report.precondition_seconds = time.perf_counter() - start
    _one_sided_loop(C, V, tol, report)
    result = _extract(A64, C, V, report)
    report.wall_seconds = time.perf_counter() - start
    N = n * (n - 1) // 2
    report.ju_ratio = report.rotations / N if N else 0.0
    return result
