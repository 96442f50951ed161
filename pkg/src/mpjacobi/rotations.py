"""Jacobi rotations: parameter computation and in-place application.

A rotation ``J(i, j; theta)`` equals the identity except
``J[i, i] = J[j, j] = c``, ``J[i, j] = s`` and ``J[j, i] = -s``.
Right-multiplying a matrix by ``J`` therefore maps columns
``x_i, x_j`` to ``c*x_i - s*x_j`` and ``s*x_i + c*x_j``.

The compiled kernels are built once per working precision so that a
float32 solve never touches float64 arithmetic inside the inner loops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import PivotAlreadyOrthogonal

STOP_MIN_DIAG = 0
STOP_GEOMEAN_DIAG = 1


def _build_kernels(ftype):
    zero = ftype(0.0)
    one = ftype(1.0)
    two = ftype(2.0)
    # beyond this |mu|, 1 + mu^2 rounds to mu^2 and t = 1/(2 mu) to working precision
    big = ftype(1.0 / math.sqrt(np.finfo(ftype).eps / 2))
    jit = numba.njit(nogil=True, fastmath=False)

    @jit
    def rotation_params(app, aqq, apq):
        if apq == zero:
            return one, zero
        mu = (aqq - app) / (two * apq)
        if abs(mu) > big:
            t = one / (two * mu)
        elif mu >= zero:
            t = one / (mu + math.sqrt(one + mu * mu))
        else:
            t = one / (mu - math.sqrt(one + mu * mu))
        c = one / math.sqrt(one + t * t)
        return c, t * c

    @jit
    def rotate_columns(X, i, j, c, s):
        # c*x_i - s*x_j written as x_i - s*(x_j + tau*x_i) with tau = s/(1 + c) = (1 - c)/s;
        # the implied cosine 1 - s*tau stays consistent with s even when c rounds to 1.
        # Computed rotations have |s| <= c; steeper ones (caller supplied) use the plain form.
        if abs(s) > c:
            for k in range(X.shape[0]):
                xi = X[k, i]
                xj = X[k, j]
                X[k, i] = c * xi - s * xj
                X[k, j] = s * xi + c * xj
            return
        tau = s / (one + c)
        for k in range(X.shape[0]):
            xi = X[k, i]
            xj = X[k, j]
            X[k, i] = xi - s * (xj + tau * xi)
            X[k, j] = xj + s * (xi - tau * xj)

    @jit
    def rotate_symmetric(A, i, j, c, s):
        # J^T A J on full symmetric storage; the (i, j) pivot is annihilated exactly
        aij = A[i, j]
        t = s / c
        tau = s / (one + c)
        for k in range(A.shape[0]):
            if k == i or k == j:
                continue
            aki = A[k, i]
            akj = A[k, j]
            nki = aki - s * (akj + tau * aki)
            nkj = akj + s * (aki - tau * akj)
            A[k, i] = nki
            A[i, k] = nki
            A[k, j] = nkj
            A[j, k] = nkj
        A[i, i] = A[i, i] - t * aij
        A[j, j] = A[j, j] + t * aij
        A[i, j] = zero
        A[j, i] = zero

    @jit
    def cyclic_sweep(A, P, nu, rule):
        n = A.shape[0]
        applied = 0
        for i in range(n - 1):
            for j in range(i + 1, n):
                aij = A[i, j]
                if rule == STOP_MIN_DIAG:
                    thr = nu * min(abs(A[i, i]), abs(A[j, j]))
                else:
                    thr = nu * math.sqrt(abs(A[i, i]) * abs(A[j, j]))
                if abs(aij) <= thr:
                    A[i, j] = zero
                    A[j, i] = zero
                else:
                    c, s = rotation_params(A[i, i], A[j, j], aij)
                    rotate_symmetric(A, i, j, c, s)
                    rotate_columns(P, i, j, c, s)
                    applied += 1
        return applied

    @jit
    def classical_run(A, P, tol, max_rotations, history, every):
        # history[0] is the starting off-norm; one entry per `every` rotations after that
        n = A.shape[0]
        done = 0
        nrec = 0
        while True:
            best = -1.0
            bp = 0
            bq = 1
            off2 = 0.0
            for q in range(1, n):
                for p in range(q):
                    v = abs(A[p, q])
                    off2 += 2.0 * float(v) * float(v)
                    if v > best or (v == best and (p < bp or (p == bp and q < bq))):
                        best = v
                        bp = p
                        bq = q
            off = math.sqrt(off2)
            if done % every == 0 and nrec < history.shape[0]:
                history[nrec] = off
                nrec += 1
            if off <= tol:
                return done, nrec, True
            if done >= max_rotations:
                return done, nrec, False
            c, s = rotation_params(A[bp, bp], A[bq, bq], A[bp, bq])
            rotate_symmetric(A, bp, bq, c, s)
            rotate_columns(P, bp, bq, c, s)
            done += 1

    @jit
    def dot(x, y):
        # Neumaier-compensated summation of the products; keeps the rounding
        # noise of c_i^T c_j well under the nu = u pivot threshold
        total = zero
        comp = zero
        for k in range(x.shape[0]):
            p = x[k] * y[k]
            t = total + p
            if abs(total) >= abs(p):
                comp += (total - t) + p
            else:
                comp += (p - t) + total
            total = t
        return total + comp

    @jit
    def one_sided_sweep(C, V, nu):
        n = C.shape[1]
        applied = 0
        for i in range(n - 1):
            for j in range(i + 1, n):
                ci = C[:, i]
                cj = C[:, j]
                aij = dot(ci, cj)
                if aij == zero:
                    continue
                aii = dot(ci, ci)
                ajj = dot(cj, cj)
                if abs(aij) > nu * math.sqrt(aii) * math.sqrt(ajj):
                    c, s = rotation_params(aii, ajj, aij)
                    rotate_columns(C, i, j, c, s)
                    rotate_columns(V, i, j, c, s)
                    applied += 1
        return applied

    return {
        "rotation_params": rotation_params,
        "rotate_columns": rotate_columns,
        "rotate_symmetric": rotate_symmetric,
        "cyclic_sweep": cyclic_sweep,
        "classical_run": classical_run,
        "one_sided_sweep": one_sided_sweep,
        "dot": dot,
    }


_KERNELS = {np.dtype(np.float32): _build_kernels(np.float32), np.dtype(np.float64): _build_kernels(np.float64)}


def kernels(dtype) -> dict:
    """Compiled kernels for ``dtype`` (float32 or float64)."""
    try:
        return _KERNELS[np.dtype(dtype)]
    except KeyError:
        raise TypeError(f"no kernels for dtype {dtype}; expected float32 or float64") from None


@dataclass(frozen=True)
class JacobiRotation:
    """Pivot pair ``(i, j)`` with ``i < j`` and its cosine-sine pair."""

    i: int
    j: int
    c: float
    s: float

    def __post_init__(self):
        if not 0 <= self.i < self.j:
            raise ValueError(f"pivot must satisfy 0 <= i < j, got ({self.i}, {self.j})")

    @property
    def theta(self) -> float:
        return math.atan2(self.s, self.c)

    def as_matrix(self, n: int) -> np.ndarray:
        J = np.eye(n)
        J[self.i, self.i] = J[self.j, self.j] = self.c
        J[self.i, self.j] = self.s
        J[self.j, self.i] = -self.s
        return J


def compute_two_sided(aii, ajj, aij, dtype=np.float64) -> tuple[float, float]:
    """Cosine-sine pair annihilating ``a_ij`` in ``J^T A J``.

    Returns ``(1, 0)`` when ``a_ij == 0``.
    """
    ft = np.dtype(dtype).type
    c, s = kernels(dtype)["rotation_params"](ft(aii), ft(ajj), ft(aij))
    return float(c), float(s)


def compute_one_sided(aiTai, ajTaj, aiTaj, dtype=np.float64) -> tuple[float, float]:
    """Cosine-sine pair making columns i and j of ``A J`` orthogonal, from Gram entries."""
    if aiTaj == 0:
        raise PivotAlreadyOrthogonal("columns are already orthogonal (a_i^T a_j == 0)")
    return compute_two_sided(aiTai, ajTaj, aiTaj, dtype)


def two_sided_rotation(A: np.ndarray, i: int, j: int) -> JacobiRotation:
    """The annihilating rotation for pivot ``(i, j)`` of symmetric ``A``."""
    c, s = compute_two_sided(A[i, i], A[j, j], A[i, j], A.dtype)
    return JacobiRotation(i, j, c, s)


def one_sided_rotation(C: np.ndarray, i: int, j: int) -> JacobiRotation:
    """The orthogonalizing rotation for columns ``(i, j)`` of ``C``."""
    dot = kernels(C.dtype)["dot"]
    ci, cj = np.ascontiguousarray(C[:, i]), np.ascontiguousarray(C[:, j])
    c, s = compute_one_sided(dot(ci, ci), dot(cj, cj), dot(ci, cj), C.dtype)
    return JacobiRotation(i, j, c, s)


def apply_two_sided(A: np.ndarray, r: JacobiRotation) -> None:
    """In place ``A <- J^T A J``; rows/columns other than ``i, j`` are untouched.

    ``r`` must have been computed from the current ``(i, j)`` entries of
    ``A``: the pivot entries are stored as exact zeros.
    """
    ft = A.dtype.type
    kernels(A.dtype)["rotate_symmetric"](A, r.i, r.j, ft(r.c), ft(r.s))


def apply_one_sided(C: np.ndarray, r: JacobiRotation) -> None:
    """In place ``C <- C J``; only columns ``i`` and ``j`` change."""
    ft = C.dtype.type
    kernels(C.dtype)["rotate_columns"](C, r.i, r.j, ft(r.c), ft(r.s))


def accumulate(P: np.ndarray, r: JacobiRotation) -> None:
    """In place ``P <- P J``."""
    apply_one_sided(P, r)
