import numpy as np
import pytest
from hypothesis import given, strategies as st

from sctrim import DataError, rpca, singular_value_threshold, soft_threshold, svd_truncate

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)
nonneg = st.floats(min_value=0.0, max_value=1e6, allow_nan=False)


def test_svd_truncate_exact_rank_identity():
    rng = np.random.default_rng(0)
    Y = rng.normal(size=(8, 2)) @ rng.normal(size=(2, 6))
    np.testing.assert_allclose(svd_truncate(Y, 2), Y, atol=1e-10)


def test_svd_truncate_diagonal():
    np.testing.assert_allclose(
        svd_truncate(np.diag([3.0, 1.0]), 1), np.diag([3.0, 0.0]), atol=1e-12
    )


def test_svd_truncate_error_matches_singular_tail():
    rng = np.random.default_rng(1)
    Y = rng.normal(size=(10, 8))
    approx = svd_truncate(Y, 3)
    singulars = np.linalg.svd(Y, compute_uv=False)
    expected = np.sqrt(np.sum(singulars[3:] ** 2))
    assert abs(np.linalg.norm(Y - approx) - expected) < 1e-10


def test_svd_truncate_error_monotone_in_k():
    rng = np.random.default_rng(2)
    Y = rng.normal(size=(9, 7))
    errors = [np.linalg.norm(Y - svd_truncate(Y, k)) for k in range(1, 8)]
    assert all(a >= b - 1e-12 for a, b in zip(errors, errors[1:]))


def test_svd_truncate_range_check():
    with pytest.raises(ValueError):
        svd_truncate(np.eye(3), 0)
    with pytest.raises(ValueError):
        svd_truncate(np.eye(3), 4)


def test_soft_threshold_values():
    assert soft_threshold(5.0, 2.0) == 3.0
    assert soft_threshold(-1.5, 2.0) == 0.0
    assert soft_threshold(0.0, 1.0) == 0.0


@given(x=finite, tau=nonneg)
def test_soft_threshold_odd(x, tau):
    assert soft_threshold(-x, tau) == -soft_threshold(x, tau)


def test_soft_threshold_rejects_negative_tau():
    with pytest.raises(ValueError):
        soft_threshold(1.0, -0.5)


def test_svt_diagonal():
    np.testing.assert_allclose(
        singular_value_threshold(np.diag([3.0, 1.0]), 1.0),
        np.diag([2.0, 0.0]),
        atol=1e-12,
    )


def test_svt_zero_threshold_is_identity():
    rng = np.random.default_rng(3)
    Y = rng.normal(size=(5, 4))
    np.testing.assert_allclose(singular_value_threshold(Y, 0.0), Y, atol=1e-10)


def test_svt_full_shrinkage():
    rng = np.random.default_rng(4)
    Y = rng.normal(size=(5, 4))
    sigma_max = np.linalg.svd(Y, compute_uv=False)[0]
    out = singular_value_threshold(Y, sigma_max + 1e-9)
    np.testing.assert_allclose(out, np.zeros_like(Y), atol=1e-10)


def test_rpca_zero_matrix_fixed_point():
    d = rpca(np.zeros((6, 5)))
    assert d.converged
    assert d.iterations <= 1
    np.testing.assert_array_equal(d.L, 0.0)
    np.testing.assert_array_equal(d.S, 0.0)


def test_rpca_rank_one_plus_spikes_recovery():
    # Incoherent rank-1 matrix (all entries 10) with 5 large spikes.
    rng = np.random.default_rng(42)
    L0 = 10.0 * np.ones((20, 20))
    S0 = np.zeros(400)
    S0[rng.choice(400, 5, replace=False)] = 50.0
    S0 = S0.reshape(20, 20)
    d = rpca(L0 + S0)
    assert d.converged
    rel = np.linalg.norm(d.L - L0) / np.linalg.norm(L0)
    assert rel <= 1e-5


def test_rpca_noise_objective_beats_trivial_point():
    rng = np.random.default_rng(7)
    Y = rng.normal(size=(25, 25))
    d = rpca(Y)
    objective = np.linalg.svd(d.L, compute_uv=False).sum() + d.lam * np.abs(d.S).sum()
    trivial = np.linalg.svd(Y, compute_uv=False).sum()
    assert objective <= trivial + 1e-9


def test_rpca_residual_bound_when_converged():
    rng = np.random.default_rng(8)
    Y = rng.normal(size=(15, 12))
    d = rpca(Y, tol=1e-6)
    assert d.converged
    assert np.linalg.norm(Y - d.L - d.S) / np.linalg.norm(Y) <= 1e-6
    np.testing.assert_allclose(Y, d.L + d.S, atol=1e-6 * np.linalg.norm(Y))


def test_rpca_objective_near_monotone():
    # ADMM is not a strict descent method on the raw objective; increases
    # stay within a small relative tolerance of the running value.
    rng = np.random.default_rng(9)
    A = rng.normal(size=(30, 3))
    Y = A @ rng.normal(size=(3, 30))
    Y.flat[rng.choice(Y.size, 40, replace=False)] += 20.0
    d = rpca(Y)
    path = np.array(d.objective_path)
    diffs = np.diff(path)
    assert np.all(diffs <= 5e-3 * path[:-1])


def test_rpca_rejects_non_finite():
    Y = np.ones((4, 4))
    Y[1, 1] = np.inf
    with pytest.raises(DataError):
        rpca(Y)


def test_rpca_non_convergence_is_flagged_not_raised():
    rng = np.random.default_rng(10)
    d = rpca(rng.normal(size=(12, 12)), max_iter=2)
    assert not d.converged
    assert d.iterations == 2
