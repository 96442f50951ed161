"""Mixed-precision Jacobi eigenvalue and singular value solvers.

A float32 solve followed by float64 re-orthogonalization gives a nearly
diagonal starting point, after which float64 Jacobi sweeps converge in
very few passes.
"""

from .eig import (
    EIG_DEFAULTS,
    SolveReport,
    SymEigResult,
    ToleranceConfig,
    classical_jacobi,
    cyclic_jacobi,
    estimate_norm2,
    mixed_precision_jacobi,
)
from .errors import (
    DegenerateInput,
    MPJacobiError,
    NoConvergence,
    PivotAlreadyOrthogonal,
    PrecisionOverflow,
    RankDeficient,
)
from .harness import Algorithm, Cell, ExperimentRow, emit, orth_defect, residual_eig, residual_svd, run_grid
from .matgen import GroundTruth, Kind, MatGenSpec, generate, haar_orthogonal, spectral_gap
from .numcore import Precision, cast_precision, frobenius_norm, off_norm
from .orth import householder_qr, mgs_qr, orthogonalize
from .rotations import JacobiRotation
from .svd import SVD_DEFAULTS, SvdResult, mixed_precision_svd, one_sided_jacobi_svd

__version__ = "0.1.0"
