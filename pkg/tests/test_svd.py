import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mpjacobi.eig import ToleranceConfig
from mpjacobi.errors import NoConvergence, RankDeficient
from mpjacobi.harness import orth_defect, residual_svd
from mpjacobi.matgen import Kind, MatGenSpec, generate
from mpjacobi.numcore import frobenius_norm
from mpjacobi.svd import (
    LOW_SVD_SOLVERS,
    SVD_DEFAULTS,
    gram_off_norm,
    lapack_low_precision_svd,
    low_precision_svd,
    mixed_precision_svd,
    one_sided_jacobi_svd,
)
from oracles import OMEGA, UPSILON, charpoly_eigenvalues

SOLVERS = [one_sided_jacobi_svd, mixed_precision_svd]


def rect(mode, kappa, n, m, seed=1):
    return generate(MatGenSpec(Kind.RECTANGULAR, mode, kappa, n, rows=m, seed=seed))


def test_defaults():
    assert SVD_DEFAULTS.eps_factor == 0.1 and SVD_DEFAULTS.nu_factor == 1.0
    assert SVD_DEFAULTS.early_stop_ratio == 2e-4


def test_gram_off_norm_examples():
    assert gram_off_norm(np.eye(4)[:, :3]) == (0.0, math.sqrt(3))
    off, total = gram_off_norm(np.array([[1.0, 1.0], [0.0, 1.0]]))
    assert off == pytest.approx(math.sqrt(2), rel=2 * OMEGA)
    assert total == pytest.approx(math.sqrt(7), rel=2 * OMEGA)


@pytest.mark.parametrize("solver", SOLVERS)
def test_orthogonal_columns_need_no_rotations(solver):
    A = np.zeros((4, 2))
    A[0, 0], A[1, 1] = 2.0, 3.0
    res = solver(A)
    assert res.report.rotations == 0
    assert list(res.sigma) == [3.0, 2.0]
    assert np.array_equal(np.abs(res.V), [[0, 1], [1, 0]])


@pytest.mark.parametrize("solver", SOLVERS)
def test_symmetric_positive_definite_two_by_two(solver):
    res = solver(np.array([[2.0, 1.0], [1.0, 3.0]]))
    assert res.sigma == pytest.approx([(5 + math.sqrt(5)) / 2, (5 - math.sqrt(5)) / 2], abs=8 * OMEGA * 4)


def test_small_matrix_against_gram_oracle():
    rng = np.random.default_rng(12)
    for _ in range(5):
        A = rng.standard_normal((6, 3))
        res = one_sided_jacobi_svd(A)
        oracle = np.sqrt(charpoly_eigenvalues(A.T @ A))[::-1]
        kappa = oracle[0] / oracle[-1]
        assert np.all(np.abs(res.sigma - oracle) / oracle[0] <= 100 * 3 * OMEGA * kappa)


def test_gram_off_ratio_decreases_across_sweeps():
    A = np.random.default_rng(2).standard_normal((64, 32))
    res = one_sided_jacobi_svd(A)
    total = frobenius_norm(A.T @ A)
    h = [x / total for x in res.report.off_history]
    # strict decrease until the final sweep, which may only shuffle rounding noise
    assert all(b < a for a, b in zip(h[:-1], h[1:-1]))
    assert h[-1] <= 1e-13


def test_rank_deficiency_detected():
    A = np.random.default_rng(3).standard_normal((8, 4))
    A[:, 2] = A[:, 0] + A[:, 1]
    with pytest.raises(RankDeficient):
        one_sided_jacobi_svd(A)
    with pytest.raises(ValueError):
        one_sided_jacobi_svd(np.ones((2, 3)))


def test_no_convergence():
    A, _ = rect(3, 1e6, 32, 64)
    with pytest.raises(NoConvergence):
        one_sided_jacobi_svd(A, ToleranceConfig(nu_factor=1.0, max_sweeps=1))


def test_early_stop_rule():
    A, _ = rect(4, 1e3, 32, 64)
    rep = one_sided_jacobi_svd(A).report
    N = 32 * 31 // 2
    if rep.early_stopped:
        assert rep.sweep_rotations[-1] < 2e-4 * N
    # without the ratio rule the Gram test at eps = 0.1 omega sits below the
    # rounding floor of a float64 Gram matrix and is never met
    with pytest.raises(NoConvergence) as info:
        one_sided_jacobi_svd(A, ToleranceConfig(nu_factor=1.0, early_stop_ratio=None, max_sweeps=20))
    assert not info.value.report.early_stopped
    assert info.value.report.off_history[-1] <= 100 * OMEGA * frobenius_norm(A.T @ A)
    loose = one_sided_jacobi_svd(A, ToleranceConfig(eps_factor=100.0, nu_factor=1.0, early_stop_ratio=None))
    assert not loose.report.early_stopped


def test_stalled_sweeps_stop_the_run():
    A, _ = rect(4, 1e3, 128, 256, seed=2)
    h = one_sided_jacobi_svd(A).report.off_history
    assert h[-1] > 0.9 * h[-2]
    assert all(b <= 0.9 * a for a, b in zip(h[:-1], h[1:-1]))


@pytest.mark.parametrize("low", sorted(LOW_SVD_SOLVERS))
def test_low_precision_solvers_on_diagonal(low):
    A = np.zeros((5, 3))
    A[0, 0], A[1, 1], A[2, 2] = 1.0, 4.0, 2.0
    Z, _ = LOW_SVD_SOLVERS[low](A)
    assert Z.dtype == np.float32
    assert set(np.abs(Z).ravel()) <= {0.0, 1.0} and np.array_equal(np.abs(Z).sum(axis=0), np.ones(3))


@pytest.mark.parametrize("low", [low_precision_svd, lapack_low_precision_svd])
def test_low_precision_accuracy(low):
    A, _ = rect(5, 1e2, 64, 128, seed=4)
    Z, s = low(A)
    Z64, s64 = Z.astype(np.float64), s.astype(np.float64)
    assert orth_defect(Z64) <= 64 * 10 * UPSILON
    gram_res = frobenius_norm(A.T @ (A @ Z64) - Z64 * s64**2)
    assert gram_res <= 10 * 64 * UPSILON * np.linalg.norm(A, 2) ** 2


def test_mixed_table8_cell():
    A, _ = rect(4, 1e3, 128, 256, seed=2)
    mixed = mixed_precision_svd(A)
    plain = one_sided_jacobi_svd(A)
    assert mixed.report.sweeps * 2 <= plain.report.sweeps
    assert mixed.report.off0 <= mixed.report.bd
    assert residual_svd(A, mixed.U, mixed.sigma, mixed.V) <= 1e-13
    assert orth_defect(mixed.U) <= 1e-12 and orth_defect(mixed.V) <= 1e-12


@pytest.mark.parametrize("orth", ["mgs", "householder"])
@pytest.mark.parametrize("low", ["lapack", "jacobi"])
def test_mixed_variants_agree(orth, low):
    A, truth = rect(3, 1e4, 24, 40, seed=7)
    res = mixed_precision_svd(A, orthogonalizer=orth, low_solver=low)
    assert res.sigma == pytest.approx(np.sort(truth.spectrum)[::-1], rel=100 * 24 * OMEGA * 1e4)


def test_float32_one_sided_svd():
    A, truth = rect(4, 10.0, 8, 16)
    res = one_sided_jacobi_svd(A.astype(np.float32), ToleranceConfig(eps_factor=10.0, nu_factor=1.0))
    assert res.U.dtype == np.float32 and res.V.dtype == np.float32
    assert res.sigma == pytest.approx(np.sort(truth.spectrum)[::-1], rel=100 * 8 * UPSILON)


shapes = st.tuples(st.integers(1, 12), st.integers(0, 10)).map(lambda t: (t[0] + t[1], t[0]))


@pytest.mark.parametrize("solver", SOLVERS)
@given(
    shape=shapes,
    mode=st.integers(1, 5),
    kappa=st.sampled_from([1.0, 10.0, 1e3, 1e5]),
    seed=st.integers(0, 2**32),
)
def test_solution_contract_on_generated_matrices(solver, shape, mode, kappa, seed):
    m, n = shape
    A, truth = generate(MatGenSpec(Kind.RECTANGULAR, mode, kappa, n, rows=m, seed=seed))
    res = solver(A)
    sigma = res.sigma
    assert np.all(np.diff(sigma) <= 0) and np.all(sigma > 0)
    assert np.all(np.abs(sigma - np.sort(truth.spectrum)[::-1]) / sigma[0] <= 100 * n * OMEGA * kappa)
    assert residual_svd(A, res.U, sigma, res.V) <= 100 * n * OMEGA
    assert orth_defect(res.V) <= 100 * n * OMEGA
    # U comes from normalizing C, so its columns inherit the relative Gram
    # error divided by the small singular values
    assert orth_defect(res.U) <= 100 * n * OMEGA * kappa
    assert np.all(np.abs(np.linalg.norm(res.U, axis=0) - 1) <= 4 * OMEGA)
    # rotations preserve the Frobenius norm of the working matrix
    assert frobenius_norm(res.U * sigma) == pytest.approx(frobenius_norm(A), rel=100 * n * OMEGA)
