import numpy as np
import pytest

from sctrim import bspline_basis, fpca_scores


def cox_de_boor(x, i, degree, knots):
    """Textbook recursive B-spline evaluation, used as an independent oracle."""
    if degree == 0:
        if knots[i] <= x < knots[i + 1]:
            return 1.0
        # Close the final interval on the right.
        if x == knots[-1] and knots[i] <= x <= knots[i + 1] and knots[i] < knots[i + 1]:
            return 1.0
        return 0.0
    left = 0.0
    if knots[i + degree] != knots[i]:
        left = (x - knots[i]) / (knots[i + degree] - knots[i]) * cox_de_boor(
            x, i, degree - 1, knots
        )
    right = 0.0
    if knots[i + degree + 1] != knots[i + 1]:
        right = (knots[i + degree + 1] - x) / (
            knots[i + degree + 1] - knots[i + 1]
        ) * cox_de_boor(x, i + 1, degree - 1, knots)
    return left + right


def open_uniform_knots(basis_size, degree):
    interior = np.linspace(0.0, 1.0, basis_size - degree + 1)[1:-1]
    return np.concatenate([np.zeros(degree + 1), interior, np.ones(degree + 1)])


def test_partition_of_unity():
    for t0, size, degree in [(12, 5, 3), (20, 8, 3), (9, 4, 2), (30, 15, 3)]:
        basis = bspline_basis(t0, size, degree)
        np.testing.assert_allclose(basis.sum(axis=1), 1.0, atol=1e-12)


def test_degree_zero_indicator_blocks():
    basis = bspline_basis(8, 4, degree=0)
    assert basis.shape == (8, 4)
    np.testing.assert_array_equal(basis.sum(axis=1), np.ones(8))
    assert np.all((basis == 0.0) | (basis == 1.0))
    assert np.all(basis.sum(axis=0) > 0)


def test_cubic_matches_recursive_oracle():
    t0, size, degree = 17, 6, 3
    basis = bspline_basis(t0, size, degree)
    knots = open_uniform_knots(size, degree)
    x_grid = np.linspace(0.0, 1.0, t0)
    oracle = np.array(
        [[cox_de_boor(x, i, degree, knots) for i in range(size)] for x in x_grid]
    )
    np.testing.assert_allclose(basis, oracle, atol=1e-12)


def test_infeasible_sizes_raise():
    with pytest.raises(ValueError):
        bspline_basis(10, 3, degree=3)
    with pytest.raises(ValueError):
        bspline_basis(5, 5, degree=3)


def test_identical_curves_are_degenerate():
    curve = np.sin(np.linspace(0, 3, 12))
    scores = fpca_scores(np.tile(curve, (5, 1)), basis_size=4)
    assert scores.K == 1
    assert scores.diagnostics.get("degenerate") == 1.0
    np.testing.assert_allclose(scores.scores, 0.0, atol=1e-9)


def test_duplicate_groups_map_together():
    t = np.linspace(0, 1, 14)
    a = 1.0 + t
    b = np.cos(4 * t)
    curves = np.vstack([a, a, a, b, b, b])
    scores = fpca_scores(curves, basis_size=5)
    np.testing.assert_allclose(scores.scores[0], scores.scores[1], atol=1e-9)
    np.testing.assert_allclose(scores.scores[0], scores.scores[2], atol=1e-9)
    np.testing.assert_allclose(scores.scores[3], scores.scores[4], atol=1e-9)
    assert np.linalg.norm(scores.scores[0] - scores.scores[3]) > 1e-3


def test_scores_match_direct_eigendecomposition():
    rng = np.random.default_rng(11)
    curves = rng.normal(size=(5, 16)).cumsum(axis=1)
    basis_size = 4
    scores = fpca_scores(curves, basis_size=basis_size, variance_target=1.0)

    # Independent oracle: normal-equations projection and numpy.linalg.eig.
    basis = bspline_basis(16, basis_size)
    coeffs = (np.linalg.inv(basis.T @ basis) @ basis.T @ curves.T).T
    centered = coeffs - coeffs.mean(axis=0)
    cov = centered.T @ centered / (curves.shape[0] - 1)
    eigvals, eigvecs = np.linalg.eig(cov)
    order = np.argsort(eigvals.real)[::-1]
    oracle = centered @ eigvecs[:, order].real

    k = scores.K
    # Eigenvector signs are arbitrary: compare pairwise distances.
    def dists(m):
        return np.linalg.norm(m[:, None, :] - m[None, :, :], axis=2)

    np.testing.assert_allclose(
        dists(scores.scores), dists(oracle[:, :k]), atol=1e-8
    )


def test_translation_invariance():
    rng = np.random.default_rng(12)
    curves = rng.normal(size=(6, 15))
    common = np.linspace(0, 5, 15)
    a = fpca_scores(curves, basis_size=5)
    b = fpca_scores(curves + common, basis_size=5)
    np.testing.assert_allclose(a.scores, b.scores, atol=1e-8)


def test_reconstruction_error_non_increasing_in_basis_size():
    rng = np.random.default_rng(13)
    curves = rng.normal(size=(4, 40)).cumsum(axis=1)
    errors = []
    for size in (4, 6, 8, 12, 16):
        basis = bspline_basis(40, size)
        coeffs, *_ = np.linalg.lstsq(basis, curves.T, rcond=None)
        errors.append(np.linalg.norm(curves.T - basis @ coeffs))
    assert all(a >= b - 1e-9 for a, b in zip(errors, errors[1:]))


def test_explained_fractions_contract():
    rng = np.random.default_rng(14)
    curves = rng.normal(size=(8, 20)).cumsum(axis=1)
    scores = fpca_scores(curves, basis_size=6, variance_target=0.9)
    explained = scores.explained
    assert np.all(explained > 0)
    assert np.all(np.diff(explained) <= 1e-12)
    assert explained.sum() <= 1 + 1e-9
    assert scores.K <= scores.basis_size
    assert scores.scores.shape == (8, scores.K)


def test_preconditions():
    with pytest.raises(ValueError):
        fpca_scores(np.ones((2, 12)))
    with pytest.raises(ValueError):
        fpca_scores(np.ones((5, 3)))
    with pytest.raises(ValueError):
        fpca_scores(np.ones((5, 12)), variance_target=0.0)
