"""Greedy forward selection of donors with a modified-BIC stopping rule.

Each round adds the donor that maximizes the joint R-squared of an
intercept-included OLS fit of the treated pre-period series on the selected
donors.  The stopping rule penalizes model size by
``log(log(n_units)) * r * log(horizon) / horizon``; the horizon defaults to
the pre-period length (the sample the regressions are fit on), with the
post-period length available as an alternative.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["ForwardPath", "r_squared", "forward_select", "mbic_stop"]

# Residual-variance floor applied before taking logs.
SIGMA2_FLOOR = 1e-12


@dataclass(frozen=True)
class ForwardPath:
    """Selection order with the R-squared, residual-variance, and mBIC paths."""

    order: tuple
    r2_path: tuple
    sigma2_path: tuple
    mbic_path: tuple
    chosen_r: int


def _ols_sse(y, X):
    """Sum of squared residuals of y on [1, X]; None when rank deficient."""
    design = np.column_stack([np.ones(len(y)), X])
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        return None
    resid = y - design @ coef
    return float(resid @ resid)


def r_squared(y: np.ndarray, X: np.ndarray) -> float:
    """Coefficient of determination of OLS of ``y`` on ``[1, X]``."""
    y = np.asarray(y, dtype=float)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] != y.shape[0]:
        X = X.T
    sse = _ols_sse(y, X)
    if sse is None:
        raise ValueError("design matrix is rank deficient")
    sst = float(np.sum((y - y.mean()) ** 2))
    if sst == 0.0:
        return 1.0
    return 1.0 - sse / sst


def forward_select(
    treated_pre: np.ndarray,
    donor_pre: np.ndarray,
    r_max: int | None = None,
    n_units: int | None = None,
    penalty_horizon: int | None = None,
) -> ForwardPath:
    """Run the greedy donor search and apply the mBIC stopping rule.

    Parameters
    ----------
    treated_pre : array, shape (t0,)
        Pre-intervention series of the treated unit.
    donor_pre : array, shape (t0, J)
        Pre-intervention donor matrix, one column per donor.
    r_max : int, optional
        Maximum path length; defaults to ``min(t0 - 2, J)``.
    n_units, penalty_horizon : int, optional
        Knobs of :func:`mbic_stop`; default to J and t0.

    Ties in R-squared break toward the smaller donor column index, and
    rank-deficient candidate sets are skipped rather than raised.
    """
    y = np.asarray(treated_pre, dtype=float)
    donors = np.asarray(donor_pre, dtype=float)
    t0, n_donors = donors.shape
    if y.shape[0] != t0:
        raise ValueError("treated_pre and donor_pre disagree on t0")
    cap = min(t0 - 2, n_donors)
    if r_max is None:
        r_max = cap
    if not 1 <= r_max <= cap:
        raise ValueError(f"r_max={r_max} out of range (1..{cap})")

    sst = float(np.sum((y - y.mean()) ** 2))
    selected: list = []
    r2_path = []
    sigma2_path = []
    for _ in range(r_max):
        best_j = None
        best_sse = None
        for j in range(n_donors):
            if j in selected:
                continue
            sse = _ols_sse(y, donors[:, selected + [j]])
            if sse is None:
                continue
            if best_sse is None or sse < best_sse - 1e-15 * max(1.0, abs(best_sse)):
                best_j, best_sse = j, sse
        if best_j is None:
            break
        selected.append(best_j)
        r2_path.append(1.0 - best_sse / sst if sst > 0.0 else 1.0)
        sigma2_path.append(best_sse / t0)

    if not selected:
        raise ValueError("no candidate donor produced a full-rank fit")
    mbic = _mbic_values(
        sigma2_path,
        n_units if n_units is not None else n_donors,
        penalty_horizon if penalty_horizon is not None else t0,
    )
    return ForwardPath(
        order=tuple(selected),
        r2_path=tuple(r2_path),
        sigma2_path=tuple(sigma2_path),
        mbic_path=tuple(mbic),
        chosen_r=int(np.argmin(mbic)) + 1,
    )


def _mbic_values(sigma2_path, n_units, horizon):
    if n_units < 2:
        raise ValueError("mBIC penalty needs at least 2 units")
    if horizon < 2:
        raise ValueError("mBIC horizon must be at least 2")
    penalty = np.log(np.log(n_units)) * np.log(horizon) / horizon
    return [
        np.log(max(s2, SIGMA2_FLOOR)) + penalty * (r + 1)
        for r, s2 in enumerate(sigma2_path)
    ]


def mbic_stop(path: ForwardPath, n_units: int, horizon: int) -> int:
    """Path length minimizing ``log(sigma2_r) + log(log(n)) * r * log(h) / h``.

    Always returns at least 1; ties go to the shorter path.
    """
    if not path.order:
        raise ValueError("cannot apply the stopping rule to an empty path")
    values = _mbic_values(path.sigma2_path, n_units, horizon)
    return int(np.argmin(values)) + 1
