"""Functional PCA of pre-intervention curves.

Each unit's pre-period series is smoothed onto a B-spline basis by least
squares; the basis coefficients are centered across units and decomposed
into principal components.  The per-unit score vectors are the
low-dimensional embedding later fed to the clustering step.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BSpline

__all__ = ["FpcaScores", "bspline_basis", "fpca_scores", "default_basis_size"]

DEFAULT_VARIANCE_TARGET = 0.95
MAX_BASIS_SIZE = 15
# Relative variance below which the coefficient covariance is treated as zero.
_DEGENERATE_REL_VAR = 1e-12


@dataclass(frozen=True)
class FpcaScores:
    """Per-unit component scores (one row per unit, treated unit included)."""

    scores: np.ndarray
    explained: np.ndarray
    basis_size: int
    K: int
    diagnostics: dict = field(default_factory=dict)


def default_basis_size(t0: int) -> int:
    """Default spline basis size: half the pre-period length, capped at 15."""
    return min(t0 // 2, MAX_BASIS_SIZE)


def bspline_basis(t0: int, basis_size: int, degree: int = 3) -> np.ndarray:
    """Evaluate a B-spline basis on ``t0`` equally spaced points over [0, 1].

    The knot grid is open-uniform (clamped ends), so the returned
    ``(t0, basis_size)`` matrix has rows summing to one.
    """
    if degree < 0:
        raise ValueError("degree must be non-negative")
    if basis_size < degree + 1:
        raise ValueError(
            f"basis_size={basis_size} infeasible for degree {degree} "
            f"(needs at least {degree + 1})"
        )
    if t0 <= basis_size:
        raise ValueError(
            f"t0={t0} must exceed basis_size={basis_size} for a determined fit"
        )
    n_interior = basis_size - degree - 1
    interior = np.linspace(0.0, 1.0, n_interior + 2)[1:-1]
    knots = np.concatenate(
        [np.zeros(degree + 1), interior, np.ones(degree + 1)]
    )
    x = np.linspace(0.0, 1.0, t0)
    design = BSpline.design_matrix(x, knots, degree, extrapolate=False).toarray()
    return design


def fpca_scores(
    pre_curves: np.ndarray,
    basis_size: int | None = None,
    variance_target: float = DEFAULT_VARIANCE_TARGET,
) -> FpcaScores:
    """Project pre-period curves onto spline coefficients and extract scores.

    Parameters
    ----------
    pre_curves : array, shape (n_units, t0)
        One pre-intervention series per unit, treated unit included.
    basis_size : int, optional
        Number of spline basis functions; defaults to ``min(t0 // 2, 15)``.
    variance_target : float in (0, 1]
        Keep the smallest number of components whose explained-variance
        fractions reach this target.

    Identical curves across all units are not an error: the result carries
    ``K = 1`` with zero scores and a ``degenerate`` diagnostics flag.
    """
    curves = np.asarray(pre_curves, dtype=float)
    if curves.ndim != 2:
        raise ValueError("pre_curves must be 2-D (units x periods)")
    n_units, t0 = curves.shape
    if t0 < 4:
        raise ValueError(f"need at least 4 pre-intervention periods, got {t0}")
    if n_units < 3:
        raise ValueError(f"need at least 3 units (treated plus 2 donors), got {n_units}")
    if not 0.0 < variance_target <= 1.0:
        raise ValueError("variance_target must lie in (0, 1]")
    if basis_size is None:
        basis_size = default_basis_size(t0)

    basis = bspline_basis(t0, basis_size)
    # Least-squares spline coefficients, one row per unit.
    coeffs, *_ = np.linalg.lstsq(basis, curves.T, rcond=None)
    coeffs = coeffs.T
    centered = coeffs - coeffs.mean(axis=0)

    cov = centered.T @ centered / (n_units - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    eigvecs = eigvecs[:, order]

    total = eigvals.sum()
    scale = max(1.0, float(np.mean(coeffs**2)))
    if total <= _DEGENERATE_REL_VAR * scale:
        return FpcaScores(
            scores=np.zeros((n_units, 1)),
            explained=np.ones(1),
            basis_size=basis_size,
            K=1,
            diagnostics={"degenerate": 1.0},
        )

    fractions = eigvals / total
    K = int(np.searchsorted(np.cumsum(fractions), variance_target - 1e-12) + 1)
    K = min(K, basis_size)
    scores = centered @ eigvecs[:, :K]
    return FpcaScores(
        scores=scores,
        explained=fractions[:K],
        basis_size=basis_size,
        K=K,
        diagnostics={"total_variance": float(total)},
    )
