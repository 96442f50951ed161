"""Seeded test matrices with known spectra.

Random streams: a ``numpy.random.PCG64`` bit generator seeded with the
recipe's 64-bit seed produces uniform doubles (``Generator.random``, i.e.
``(next_uint64 >> 11) * 2**-53``). Gaussian variates come from the
Box-Muller transform applied to consecutive uniform pairs. Draw order
within one :func:`generate` call is: mode-5 spectrum uniforms, then the
left orthogonal factor, then (rectangular only) the right factor.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .numcore import UNIT_ROUNDOFF_HIGH, symmetrize

DEFAULT_SEED = 20240101


class Kind(enum.Enum):
    SYMMETRIC_PD = "sympd"
    SYMMETRIC_MULTIPLE = "symmult"
    RECTANGULAR = "rect"


@dataclass(frozen=True)
class MatGenSpec:
    """Recipe for one test matrix.

    ``cols`` is the order of a symmetric matrix and the column count of a
    rectangular one; ``rows`` defaults to ``cols``. ``multiplicity``
    defaults to 4 for the multiple-eigenvalue kind and 1 otherwise.
    """

    kind: Kind
    mode: int
    kappa: float
    cols: int
    rows: int | None = None
    multiplicity: int | None = None
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if not isinstance(self.kind, Kind):
            object.__setattr__(self, "kind", Kind(self.kind))
        if self.rows is None:
            object.__setattr__(self, "rows", self.cols)
        if self.multiplicity is None:
            object.__setattr__(self, "multiplicity", 4 if self.kind is Kind.SYMMETRIC_MULTIPLE else 1)
        if self.mode not in (1, 2, 3, 4, 5):
            raise ValueError(f"mode must be in 1..5, got {self.mode}")
        if not self.kappa >= 1:
            raise ValueError(f"kappa must be >= 1, got {self.kappa}")
        if self.cols < 1 or self.rows < self.cols:
            raise ValueError(f"need rows >= cols >= 1, got {self.rows}x{self.cols}")
        if self.kind is not Kind.RECTANGULAR and self.rows != self.cols:
            raise ValueError("symmetric kinds must be square")
        if self.multiplicity < 1 or self.cols % self.multiplicity:
            raise ValueError(f"multiplicity {self.multiplicity} must divide {self.cols}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def n(self) -> int:
        return self.cols

    @property
    def m(self) -> int:
        return self.rows

    @property
    def distinct(self) -> int:
        return self.cols // self.multiplicity

    def with_seed(self, seed: int) -> "MatGenSpec":
        return replace(self, seed=seed)

    def to_string(self) -> str:
        return f"{self.kind.value}:{self.mode}:{self.kappa!r}:{self.cols}:{self.rows}:{self.multiplicity}:{self.seed}"

    @classmethod
    def parse(cls, text: str, default_seed: int = DEFAULT_SEED) -> "MatGenSpec":
        """Parse ``kind:mode:kappa:n[:m][:mult][:seed]``; empty fields take defaults.

        ``kind`` is ``sympd``, ``symmult`` (default multiplicity 4) or
        ``rect``; ``n`` is the column count and ``m`` the row count.
        """
        parts = text.strip().split(":")
        if not 4 <= len(parts) <= 7:
            raise ValueError(f"bad matrix spec {text!r}; expected kind:mode:kappa:n[:m][:mult][:seed]")
        parts += [""] * (7 - len(parts))
        kind_s, mode_s, kappa_s, n_s, m_s, mult_s, seed_s = parts
        try:
            kind = Kind(kind_s)
        except ValueError:
            raise ValueError(f"unknown matrix kind {kind_s!r}; choose from {[k.value for k in Kind]}") from None
        n = int(n_s)
        return cls(
            kind=kind,
            mode=int(mode_s),
            kappa=float(kappa_s),
            cols=n,
            rows=int(m_s) if m_s else n,
            multiplicity=int(mult_s) if mult_s else None,
            seed=int(seed_s) if seed_s else default_seed,
        )


@dataclass(frozen=True)
class GroundTruth:
    spectrum: np.ndarray = field(repr=False)
    gap: float


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def box_muller(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard normal samples from uniform pairs via Box-Muller."""
    count = int(np.prod(shape))
    pairs = (count + 1) // 2
    u = rng.random(2 * pairs).reshape(pairs, 2)
    radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))  # 1 - u lies in (0, 1]
    angle = 2.0 * math.pi * u[:, 1]
    z = np.column_stack((radius * np.cos(angle), radius * np.sin(angle))).ravel()
    return z[:count].reshape(shape)


def make_spectrum(spec: MatGenSpec, rng: np.random.Generator | None = None) -> np.ndarray:
    """Exact eigenvalues (symmetric kinds) or singular values (rectangular).

    Each of the ``spec.distinct`` values is repeated ``multiplicity``
    times consecutively.
    """
    if rng is None:
        rng = _rng(spec.seed)
    s, kappa = spec.distinct, spec.kappa
    multiple = spec.kind is Kind.SYMMETRIC_MULTIPLE
    if spec.mode == 1:
        lam = np.full(s, 1.0 / kappa)
        lam[0] = 1.0
    elif spec.mode == 2:
        lam = np.ones(s)
        lam[-1] = 1.0 / kappa
    elif spec.mode == 3:
        if multiple:
            lam = kappa * np.linspace(-1.0, 0.0, s)
        else:
            lam = kappa ** (-np.arange(s) / max(s - 1, 1))
    elif spec.mode == 4:
        lam = 1.0 - (1.0 - 1.0 / kappa) * np.linspace(0.0, 1.0, s)
    else:
        u = rng.random(s)
        lam = -kappa * u if multiple else kappa ** (-u)
    return np.repeat(lam, spec.multiplicity)


def haar_orthogonal(n: int, seed: int | np.random.Generator, rows: int | None = None) -> np.ndarray:
    """Haar-distributed orthogonal matrix (or ``rows x n`` orthonormal frame).

    QR of a Gaussian matrix with the signs of ``diag(R)`` folded into ``Q``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rows = n if rows is None else rows
    rng = seed if isinstance(seed, np.random.Generator) else _rng(seed)
    G = box_muller(rng, (rows, n))
    Q, R = np.linalg.qr(G)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return np.asfortranarray(Q * signs)


def spectral_gap(values, distinct_tol: float | None = None) -> float:
    """Smallest gap between values that differ by more than ``distinct_tol``.

    Values closer than ``distinct_tol`` count as equal; ``inf`` when all
    values are equal. The default tolerance is ``1e3 * n * 2**-53 * max|v|``.
    """
    v = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if v.size == 0:
        raise ValueError("spectral_gap needs at least one value")
    if distinct_tol is None:
        distinct_tol = 1e3 * v.size * UNIT_ROUNDOFF_HIGH * float(np.max(np.abs(v)))
    # for each v[k], the nearest value above it by more than the tolerance
    idx = np.searchsorted(v, v + distinct_tol, side="right")
    ok = idx < v.size
    if not np.any(ok):
        return math.inf
    return float(np.min(v[idx[ok]] - v[ok]))


def generate(spec: MatGenSpec) -> tuple[np.ndarray, GroundTruth]:
    """Build the matrix described by ``spec`` together with its exact spectrum."""
    rng = _rng(spec.seed)
    lam = make_spectrum(spec, rng)
    if spec.kind is Kind.RECTANGULAR:
        U0 = haar_orthogonal(spec.cols, rng, rows=spec.rows)
        V0 = haar_orthogonal(spec.cols, rng)
        A = np.asfortranarray((U0 * lam) @ V0.T)
    else:
        P = haar_orthogonal(spec.cols, rng)
        A = symmetrize((P * lam) @ P.T)
    return A, GroundTruth(spectrum=lam, gap=spectral_gap(lam))
