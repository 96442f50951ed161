"""Precision-tagged dense matrices and the norms every solver relies on.

Matrices are plain :class:`numpy.ndarray` objects stored column-major
(``order="F"``). The dtype is the precision tag: ``float32`` is the low
precision (unit roundoff 2**-24) and ``float64`` the high precision
(unit roundoff 2**-53). Norms are always accumulated in float64.
"""

from __future__ import annotations

import enum
import math
from pathlib import Path

import numpy as np

from .errors import PrecisionOverflow

UNIT_ROUNDOFF_LOW = 2.0**-24
UNIT_ROUNDOFF_HIGH = 2.0**-53


class Precision(enum.Enum):
    LOW = "low"
    HIGH = "high"

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(np.float32) if self is Precision.LOW else np.dtype(np.float64)

    @property
    def unit_roundoff(self) -> float:
        return UNIT_ROUNDOFF_LOW if self is Precision.LOW else UNIT_ROUNDOFF_HIGH

    @classmethod
    def of(cls, M: np.ndarray) -> "Precision":
        if M.dtype == np.float32:
            return cls.LOW
        if M.dtype == np.float64:
            return cls.HIGH
        raise TypeError(f"unsupported dtype {M.dtype}; expected float32 or float64")


def as_dense(data, precision: Precision = Precision.HIGH) -> np.ndarray:
    """Copy ``data`` into a fresh column-major 2-D array at ``precision``.

    Raises ``ValueError`` for non-2-D input or non-finite entries and
    :class:`PrecisionOverflow` if a value does not fit in ``precision``.
    """
    M = np.array(data, dtype=np.float64, order="F", copy=True)
    if M.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return cast_precision(M, precision) if precision is Precision.LOW else M


def symmetrize(M: np.ndarray) -> np.ndarray:
    """Return ``(M + M^T) / 2`` as a column-major array; the result is exactly symmetric."""
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    # floating-point addition commutes, so a_ij + a_ji == a_ji + a_ij bitwise
    return np.asfortranarray((M + M.T) * M.dtype.type(0.5))


def is_symmetric(M: np.ndarray) -> bool:
    return M.ndim == 2 and M.shape[0] == M.shape[1] and bool(np.array_equal(M, M.T))


def _norm2(X: np.ndarray) -> float:
    # scale by a power of two (exact) so squares neither overflow nor underflow,
    # then sum with math.fsum: correctly rounded, hence independent of entry order
    peak = float(np.max(np.abs(X))) if X.size else 0.0
    if peak == 0.0:
        return 0.0
    scale = math.ldexp(1.0, math.frexp(peak)[1])
    Y = X / scale
    return scale * math.sqrt(math.fsum((Y * Y).ravel()))


def frobenius_norm(M: np.ndarray) -> float:
    """``||M||_F`` accumulated in float64, whatever the precision of ``M``."""
    return _norm2(np.asarray(M, dtype=np.float64))


def off_norm(M: np.ndarray) -> float:
    """Frobenius norm of ``M`` with its diagonal removed."""
    X = np.array(M, dtype=np.float64)
    np.fill_diagonal(X, 0.0)
    return _norm2(X)


def cast_precision(M: np.ndarray, target: Precision) -> np.ndarray:
    """Round ``M`` entrywise (round-to-nearest-even) into ``target``.

    Widening is exact. Narrowing raises :class:`PrecisionOverflow` if an
    entry leaves the binary32 range.
    """
    with np.errstate(over="ignore"):
        out = np.asfortranarray(M.astype(target.dtype))
    if not np.all(np.isfinite(out)) and np.all(np.isfinite(M)):
        bad = np.argwhere(~np.isfinite(out))[0]
        raise PrecisionOverflow(
            f"entry {tuple(int(k) for k in bad)} = {M[tuple(bad)]!r} overflows {target.value} precision"
        )
    return out


def save_matrix(path, M: np.ndarray) -> None:
    """Write ``rows cols`` then row-major entries with 17 significant digits."""
    M = np.asarray(M)
    lines = [f"{M.shape[0]} {M.shape[1]}"]
    for row in np.asarray(M, dtype=np.float64):
        lines.append(" ".join(f"{x:.17g}" for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def load_matrix(path, precision: Precision = Precision.HIGH) -> np.ndarray:
    tokens = Path(path).read_text().split()
    if len(tokens) < 2:
        raise ValueError(f"{path}: missing 'rows cols' header")
    rows, cols = int(tokens[0]), int(tokens[1])
    values = tokens[2:]
    if len(values) != rows * cols:
        raise ValueError(f"{path}: expected {rows * cols} entries, found {len(values)}")
    data = np.array([float(v) for v in values], dtype=np.float64).reshape(rows, cols)
    return as_dense(data, precision)
