"""Re-orthogonalization of nearly orthogonal matrices in float64."""

from __future__ import annotations

import numpy as np

from .errors import RankDeficient
from .numcore import UNIT_ROUNDOFF_LOW

# a column whose remaining norm falls below this fraction of its original norm is treated as dependent
_RANK_TOL = UNIT_ROUNDOFF_LOW**2


def _check_shape(Z):
    if Z.ndim != 2 or Z.shape[1] > Z.shape[0]:
        raise ValueError(f"expected a tall or square matrix, got shape {Z.shape}")


def mgs_qr(Z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Modified Gram-Schmidt in float64, right-looking: each normalized
    column is projected out of all later columns at once.

    Returns ``Q`` (m x n, orthonormal columns) and upper-triangular ``R``
    (n x n, positive diagonal) with ``Z = Q R``. No column pivoting is
    done, so the column order of ``Z`` is kept.

    Raises :class:`RankDeficient` when a column is (numerically) in the
    span of its predecessors.
    """
    _check_shape(Z)
    W = np.array(Z, dtype=np.float64, order="F")
    m, n = W.shape
    R = np.zeros((n, n), order="F")
    scale = np.sqrt(np.einsum("ij,ij->j", W, W))
    for k in range(n):
        rkk = np.sqrt(W[:, k] @ W[:, k])
        if rkk == 0.0 or rkk <= _RANK_TOL * scale[k]:
            raise RankDeficient(f"column {k} has vanishing norm {rkk:.3e} after elimination")
        R[k, k] = rkk
        W[:, k] /= rkk
        if k + 1 < n:
            q = W[:, k]
            r = q @ W[:, k + 1 :]
            R[k, k + 1 :] = r
            W[:, k + 1 :] -= np.outer(q, r)
    return W, R


def householder_qr(Z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Householder QR in float64 with the sign fixed so that ``diag(R) >= 0``.

    Same contract as :func:`mgs_qr`; orthogonality of ``Q`` does not
    degrade with the conditioning of ``Z``.
    """
    _check_shape(Z)
    W = np.array(Z, dtype=np.float64, order="F")
    m, n = W.shape
    scale = np.sqrt(np.einsum("ij,ij->j", W, W))
    vs = []
    for k in range(n):
        x = W[k:, k]
        alpha = np.sqrt(x @ x)
        v = x.copy()
        if alpha == 0.0:
            vs.append(None)
            continue
        # reflect onto -sign(x0)*alpha*e1 to avoid cancellation in v[0]
        v[0] += alpha if x[0] >= 0 else -alpha
        v /= np.sqrt(v @ v)
        W[k:, k:] -= 2.0 * np.outer(v, v @ W[k:, k:])
        vs.append(v)
    R = np.triu(W[:n, :n])
    Q = np.zeros((m, n), order="F")
    Q[:n, :n] = np.eye(n)
    for k in range(n - 1, -1, -1):
        v = vs[k]
        if v is not None:
            Q[k:, k:] -= 2.0 * np.outer(v, v @ Q[k:, k:])
    signs = np.where(np.diag(R) < 0, -1.0, 1.0)
    Q *= signs
    R *= signs[:, None]
    d = np.diag(R)
    for k in range(n):
        if d[k] == 0.0 or d[k] <= _RANK_TOL * scale[k]:
            raise RankDeficient(f"column {k} has vanishing norm {d[k]:.3e} after elimination")
    return np.asfortranarray(Q), np.asfortranarray(R)


ORTHOGONALIZERS = {"mgs": mgs_qr, "householder": householder_qr}


def orthogonalize(Z: np.ndarray, method: str = "mgs") -> np.ndarray:
    """Orthonormal factor of ``Z`` by ``method`` (``"mgs"`` or ``"householder"``)."""
    try:
        qr = ORTHOGONALIZERS[method]
    except KeyError:
        raise ValueError(f"unknown orthogonalizer {method!r}; choose from {sorted(ORTHOGONALIZERS)}") from None
    return qr(Z)[0]
