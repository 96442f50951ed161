import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mpjacobi.eig import (
    EIG_DEFAULTS,
    LOW_EIG_SOLVERS,
    ToleranceConfig,
    classical_jacobi,
    cyclic_jacobi,
    estimate_norm2,
    lapack_low_precision_eig,
    low_precision_eig,
    mixed_precision_jacobi,
)
from mpjacobi.errors import NoConvergence
from mpjacobi.harness import orth_defect, residual_eig
from mpjacobi.matgen import Kind, MatGenSpec, generate, haar_orthogonal
from mpjacobi.numcore import frobenius_norm, off_norm
from oracles import OMEGA, UPSILON, charpoly_eigenvalues, random_symmetric, symmetric_matrices

SQRT5 = math.sqrt(5.0)
SOLVERS = [classical_jacobi, cyclic_jacobi, mixed_precision_jacobi]


def sympd(mode, kappa, n, seed=1):
    return generate(MatGenSpec(Kind.SYMMETRIC_PD, mode, kappa, n, seed=seed))


def test_tolerance_config_validation():
    assert EIG_DEFAULTS.eps_factor == 0.1 and EIG_DEFAULTS.nu_factor == 20.0
    for bad in [dict(eps_factor=0), dict(nu_factor=-1), dict(max_sweeps=0), dict(stop_rule="max"),
                dict(early_stop_ratio=-1.0)]:  # fmt: skip
        with pytest.raises(ValueError):
            ToleranceConfig(**bad)


@pytest.mark.parametrize("solver", SOLVERS)
def test_diagonal_input_needs_no_rotations(solver):
    D = np.diag([3.0, -1.0, 2.0, 0.5])
    res = solver(D)
    assert res.report.rotations == 0
    assert res.report.sweeps == 0
    assert np.array_equal(np.sort(res.eigenvalues), np.sort(np.diag(D)))
    P = np.abs(res.P)
    assert np.array_equal(P, P.round()) and np.array_equal(P.sum(axis=0), np.ones(4))
    if solver is not mixed_precision_jacobi:
        assert np.array_equal(res.P, np.eye(4))


@pytest.mark.parametrize("solver", SOLVERS)
def test_two_by_two_closed_form(solver):
    res = solver(np.array([[2.0, 1.0], [1.0, 3.0]]))
    assert np.sort(res.eigenvalues) == pytest.approx([(5 - SQRT5) / 2, (5 + SQRT5) / 2], abs=8 * OMEGA * 4)


def test_classical_linear_rate_envelope():
    A = random_symmetric(np.random.default_rng(4), 10)
    res = classical_jacobi(A)
    N = 45
    h = res.report.off_history
    for k, off in enumerate(h):
        assert off <= (1 - 1 / N) ** (k * N / 2) * h[0] * (1 + 1e-12)


def test_classical_picks_the_largest_pivot_first():
    A = np.array([[1.0, 0.1, 0.3], [0.1, 2.0, -0.5], [0.3, -0.5, 3.0]])
    tol = ToleranceConfig(max_sweeps=1)
    # one classical "sweep" budget is N = 3 rotations, not enough here
    with pytest.raises(NoConvergence) as info:
        classical_jacobi(A, tol)
    assert info.value.report.rotations == 3


def test_classical_ties_break_lexicographically():
    A = np.array([[1.0, 0.5, 0.5], [0.5, 2.0, 0.0], [0.5, 0.0, 3.0]])
    ref = A.copy()
    res = classical_jacobi(A, ToleranceConfig(max_sweeps=60))
    assert np.array_equal(A, ref)  # input untouched
    # the first rotation must act on (0, 1): compare against applying it by hand
    from mpjacobi.rotations import apply_two_sided, two_sided_rotation

    B = np.asfortranarray(ref)
    apply_two_sided(B, two_sided_rotation(B, 0, 1))
    assert res.report.off_history[0] == pytest.approx(off_norm(ref))
    assert B[0, 1] == 0.0


def test_cyclic_against_brute_force_six_by_six():
    rng = np.random.default_rng(6)
    for _ in range(10):
        A = random_symmetric(rng, 6)
        res = cyclic_jacobi(A)
        err = np.abs(np.sort(res.eigenvalues) - charpoly_eigenvalues(A))
        assert err.max() <= 100 * OMEGA * np.linalg.norm(A, 2)


def test_cyclic_geomean_rule_converges():
    A, truth = sympd(4, 1e3, 40)
    res = cyclic_jacobi(A, ToleranceConfig(stop_rule="geomean"))
    assert off_norm(res.T) <= 0.1 * OMEGA * frobenius_norm(A)
    assert np.sort(res.eigenvalues) == pytest.approx(np.sort(truth.spectrum), abs=100 * 40 * OMEGA)


def test_cyclic_seeded_accumulation():
    A, _ = sympd(3, 1e2, 12)
    P0 = haar_orthogonal(12, 3)
    T0 = P0.T @ A @ P0
    res = cyclic_jacobi((T0 + T0.T) / 2, P0=P0)
    assert residual_eig(A, res.P, res.T) <= 100 * 12 * OMEGA
    with pytest.raises(ValueError):
        cyclic_jacobi(A, P0=np.eye(5))


def test_no_convergence_carries_report():
    A, _ = sympd(3, 1e6, 32)
    with pytest.raises(NoConvergence) as info:
        cyclic_jacobi(A, ToleranceConfig(max_sweeps=2))
    rep = info.value.report
    assert rep.sweeps == 2 and len(rep.off_history) == 3


def test_input_validation():
    with pytest.raises(ValueError):
        cyclic_jacobi(np.ones((2, 3)))
    with pytest.raises(ValueError):
        cyclic_jacobi(np.array([[1.0, np.nan], [np.nan, 1.0]]))


def test_float32_cyclic_stays_in_float32():
    A, truth = sympd(4, 1e2, 24)
    res = cyclic_jacobi(A.astype(np.float32), ToleranceConfig(eps_factor=10.0))
    assert res.P.dtype == np.float32 and res.T.dtype == np.float32
    assert orth_defect(res.P) <= 24 * 10 * UPSILON


@pytest.mark.parametrize("low", sorted(LOW_EIG_SOLVERS))
def test_low_precision_solvers_on_diagonal(low):
    Z, d = LOW_EIG_SOLVERS[low](np.diag([2.0, 5.0, 1.0]))
    assert Z.dtype == np.float32
    assert np.array_equal(np.abs(Z).sum(axis=0), np.ones(3)) and set(np.abs(Z).ravel()) <= {0.0, 1.0}


@pytest.mark.parametrize("low", [low_precision_eig, lapack_low_precision_eig])
def test_low_precision_accuracy(low):
    A, _ = sympd(5, 1e3, 64, seed=5)
    Z, d = low(A)
    Z64 = Z.astype(np.float64)
    assert orth_defect(Z64) <= 64 * 10 * UPSILON
    assert frobenius_norm(A @ Z64 - Z64 * d.astype(np.float64)) / frobenius_norm(A) <= 64 * 10 * UPSILON


def test_mixed_table1_cell():
    A, _ = sympd(4, 1e3, 256, seed=2)
    res = mixed_precision_jacobi(A)
    rep = res.report
    assert rep.sweeps <= 4
    assert residual_eig(A, res.P, res.T) <= 1e-13
    assert orth_defect(res.P) <= 1e-13
    assert rep.off0 <= rep.bd
    assert rep.precondition_seconds <= rep.wall_seconds


@pytest.mark.parametrize("orth", ["mgs", "householder"])
@pytest.mark.parametrize("low", ["lapack", "jacobi"])
def test_mixed_variants_agree(orth, low):
    A, truth = sympd(5, 1e4, 48, seed=3)
    res = mixed_precision_jacobi(A, orthogonalizer=orth, low_solver=low)
    assert np.sort(res.eigenvalues) == pytest.approx(np.sort(truth.spectrum), abs=100 * 48 * OMEGA)
    assert orth_defect(res.P) <= 100 * 48 * OMEGA


def test_mixed_accepts_custom_low_solver():
    A, _ = sympd(4, 10.0, 16)

    def exact_low(M):
        d, Z = np.linalg.eigh(M)
        return Z.astype(np.float32), d

    res = mixed_precision_jacobi(A, low_solver=exact_low)
    assert res.report.sweeps <= 3
    with pytest.raises(ValueError, match="unknown low-precision solver"):
        mixed_precision_jacobi(A, low_solver="magma")


def test_norm2_estimate():
    A, _ = sympd(3, 1e3, 64)
    assert estimate_norm2(A) == pytest.approx(1.0, rel=1e-3)
    # clustered top of the spectrum: slow convergence, but never an overestimate
    B, _ = sympd(4, 1e3, 64)
    assert 0.9 <= estimate_norm2(B) <= 1.0 + 1e-14
    R = np.random.default_rng(0).standard_normal((30, 10))
    assert estimate_norm2(R) == pytest.approx(np.linalg.norm(R, 2), rel=1e-2)
    assert estimate_norm2(np.zeros((3, 3))) == 0.0


spectra = st.builds(
    MatGenSpec,
    kind=st.just(Kind.SYMMETRIC_PD),
    mode=st.integers(1, 5),
    kappa=st.sampled_from([10.0, 1e3, 1e6]),
    cols=st.integers(2, 24),
    seed=st.integers(0, 2**32),
)


@pytest.mark.parametrize("solver", SOLVERS)
@given(spec=spectra)
def test_solution_contract_on_generated_matrices(solver, spec):
    A, truth = generate(spec)
    n = spec.n
    res = solver(A)
    norm2 = np.max(np.abs(truth.spectrum))
    assert np.all(np.abs(np.sort(res.eigenvalues) - np.sort(truth.spectrum)) <= 100 * n * OMEGA * norm2)
    assert residual_eig(A, res.P, res.T) <= 100 * n * OMEGA
    assert orth_defect(res.P) <= 100 * n * OMEGA
    assert off_norm(res.T) <= 0.1 * OMEGA * frobenius_norm(A)
    assert np.array_equal(res.T, res.T.T)


@pytest.mark.parametrize("solver", [cyclic_jacobi, mixed_precision_jacobi])
@given(A=symmetric_matrices(min_n=2, max_n=10))
def test_off_history_is_non_increasing(solver, A):
    rep = solver(A).report
    h = rep.off_history
    slack = 64 * A.shape[0] * OMEGA * frobenius_norm(A)
    assert all(b <= a + slack for a, b in zip(h, h[1:]))
    assert rep.ju_ratio >= 0 and len(rep.sweep_rotations) == rep.sweeps
    assert sum(rep.sweep_rotations) == rep.rotations


@given(A=symmetric_matrices(min_n=2, max_n=6, bound=10.0))
def test_cyclic_matches_characteristic_polynomial(A):
    res = cyclic_jacobi(A)
    scale = np.linalg.norm(A, 2)
    err = np.abs(np.sort(res.eigenvalues) - charpoly_eigenvalues(A))
    assert np.all(err <= 100 * A.shape[0] * OMEGA * scale + 1e-300)
