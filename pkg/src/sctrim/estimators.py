"""Weight estimators and counterfactual assembly.

Three fitting regimes:

* ``osc`` — least squares over the probability simplex on raw outcomes
  (projected gradient with an exact Euclidean simplex projection);
* ``fpca_synth`` — fPCA clustering trims the pool, robust PCA denoises the
  trimmed donor pre-matrix, and nonnegative least squares fits weights on
  the low-rank component;
* ``fspda`` — forward selection picks donors, then plain OLS with intercept.

In every regime the counterfactual applies the fitted weights to the
observed donor outcomes over the full horizon; nothing post-intervention
ever enters the fit.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import cluster, fpca, fselect, lowrank
from .exceptions import NumericalError
from .panel import DonorSelection, PanelMatrix, TreatmentSpec, donor_indices, split_pre_post

__all__ = [
    "WeightVector",
    "CounterfactualSeries",
    "EstimatorConfig",
    "project_simplex",
    "fit_simplex",
    "fit_nonneg",
    "fit_ols",
    "estimate",
    "METHODS",
]

METHODS = ("osc", "fpca_synth", "fspda")

SIMPLEX_MAX_ITER = 10_000
SIMPLEX_IMPROVEMENT_TOL = 1e-12
# KKT tolerance for the active-set NNLS solver.
NNLS_KKT_TOL = 1e-10


@dataclass(frozen=True)
class WeightVector:
    """Donor weights plus the constraint regime they satisfy."""

    weights: np.ndarray
    regime: str
    objective: float
    intercept: float | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if self.regime not in ("simplex", "nonneg", "unconstrained"):
            raise ValueError(f"unknown weight regime {self.regime!r}")
        if self.regime == "unconstrained" and self.intercept is None:
            raise ValueError("unconstrained weights require an intercept")


@dataclass(frozen=True)
class CounterfactualSeries:
    """Fitted counterfactual and gaps (observed minus fitted) over all of T."""

    fitted: np.ndarray
    gaps: np.ndarray


@dataclass(frozen=True)
class EstimatorConfig:
    """Knobs for the estimation pipelines; defaults follow the module docs."""

    rpca_lambda: float | None = None
    rpca_tol: float = lowrank.DEFAULT_TOL
    rpca_max_iter: int = lowrank.DEFAULT_MAX_ITER
    basis_size: int | None = None
    variance_target: float = fpca.DEFAULT_VARIANCE_TARGET
    k_max: int | None = None
    restarts: int = cluster.DEFAULT_RESTARTS
    r_max: int | None = None
    mbic_post_penalty: bool = False
    seed: int = 0

    def with_overrides(self, **kwargs):
        return replace(self, **kwargs)


def _donor_matrix(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return X


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based, exact)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    rho = np.nonzero(u * np.arange(1, v.size + 1) > css)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def fit_simplex(treated_pre: np.ndarray, donor_pre: np.ndarray) -> WeightVector:
    """Least squares over the probability simplex by projected gradient.

    Accelerated (Nesterov) projected-gradient descent with an exact simplex
    projection and a monotone safeguard: whenever the extrapolated step
    would raise the objective, momentum restarts and a plain descent step is
    taken instead.  Starting from uniform weights this keeps the objective
    at or below the uniform-weights objective throughout.  Stops when the
    objective improves by less than 1e-12 or after 10 000 iterations.
    """
    y = np.asarray(treated_pre, dtype=float)
    X = _donor_matrix(donor_pre)
    n_donors = X.shape[1]
    if n_donors == 1:
        w = np.ones(1)
        resid = y - X[:, 0]
        return WeightVector(w, "simplex", float(resid @ resid))

    lipschitz = 2.0 * np.linalg.norm(X, 2) ** 2
    w = np.full(n_donors, 1.0 / n_donors)
    if lipschitz == 0.0:
        return WeightVector(w, "simplex", float(y @ y))
    step = 1.0 / lipschitz

    def objective(weights):
        resid = X @ weights - y
        return float(resid @ resid)

    def descend(point):
        grad = 2.0 * (X.T @ (X @ point - y))
        return project_simplex(point - step * grad)

    w_prev = w
    obj = objective(w)
    theta = 1.0
    for _ in range(SIMPLEX_MAX_ITER):
        theta_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * theta**2))
        momentum = (theta - 1.0) / theta_next
        w_new = descend(w + momentum * (w - w_prev))
        obj_new = objective(w_new)
        if obj_new > obj:
            theta_next = 1.0
            w_new = descend(w)
            obj_new = objective(w_new)
        if obj - obj_new < SIMPLEX_IMPROVEMENT_TOL:
            if obj_new <= obj:
                w, obj = w_new, obj_new
            break
        w_prev, w, theta, obj = w, w_new, theta_next, obj_new
    return WeightVector(w, "simplex", obj)


def fit_nonneg(treated_pre: np.ndarray, L_pre: np.ndarray) -> WeightVector:
    """Nonnegative least squares via the Lawson-Hanson active-set method.

    At exit the KKT conditions hold: the residual's correlation with every
    zero-weight column is non-positive (within tolerance) and with every
    positive-weight column is zero.
    """
    y = np.asarray(treated_pre, dtype=float)
    A = _donor_matrix(L_pre)
    n = A.shape[1]
    x = np.zeros(n)
    passive: list = []
    w = A.T @ y
    tol = NNLS_KKT_TOL * max(1.0, float(np.abs(w).max(initial=0.0)))

    for _ in range(3 * max(n, 1)):
        candidates = [j for j in range(n) if j not in passive]
        if not candidates:
            break
        grads = A.T @ (y - A @ x)
        j_best = max(candidates, key=lambda j: (grads[j], -j))
        if grads[j_best] <= tol:
            break
        passive.append(j_best)

        while True:
            sub = A[:, passive]
            s_passive, *_ = np.linalg.lstsq(sub, y, rcond=None)
            if np.all(s_passive > 0.0):
                break
            # Step back along x -> s to the boundary, then drop zeroed donors.
            s = np.zeros(n)
            s[passive] = s_passive
            blocking = [j for j in passive if s[j] <= 0.0]
            alpha = min(
                x[j] / (x[j] - s[j]) if x[j] != s[j] else 0.0 for j in blocking
            )
            x = x + alpha * (s - x)
            passive = [j for j in passive if x[j] > 1e-14]
            x[[j for j in range(n) if j not in passive]] = 0.0
            if not passive:
                break
        x = np.zeros(n)
        if passive:
            x[passive] = s_passive

    resid = y - A @ x
    return WeightVector(x, "nonneg", float(resid @ resid))


def fit_ols(treated_pre: np.ndarray, donor_pre: np.ndarray) -> WeightVector:
    """Unconstrained OLS with intercept via a rank-revealing factorization."""
    y = np.asarray(treated_pre, dtype=float)
    X = _donor_matrix(donor_pre)
    design = np.column_stack([np.ones(len(y)), X])
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        raise NumericalError(
            "donor matrix plus intercept is rank deficient; "
            "shrink the donor set before fitting OLS weights"
        )
    resid = y - design @ coef
    return WeightVector(
        coef[1:], "unconstrained", float(resid @ resid), intercept=float(coef[0])
    )


def _counterfactual(panel, spec, selection, weights):
    donors_full = panel.values[list(selection.indices), :].T  # T x J~
    fitted = donors_full @ weights.weights
    if weights.intercept is not None:
        fitted = fitted + weights.intercept
    observed = panel.values[spec.treated_index]
    return CounterfactualSeries(fitted=fitted, gaps=observed - fitted)


def estimate(
    panel: PanelMatrix,
    spec: TreatmentSpec,
    method: str,
    config: EstimatorConfig | None = None,
):
    """Select donors, fit weights, and assemble the counterfactual.

    Returns ``(DonorSelection, WeightVector, CounterfactualSeries)``.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    if config is None:
        config = EstimatorConfig()
    spec.validate(panel)
    treated_pre, donor_pre, _, _ = split_pre_post(panel, spec)
    pool = donor_indices(panel, spec)

    if method == "osc":
        selection = DonorSelection.build(pool, "full", spec.treated_index)
        weights = fit_simplex(treated_pre, donor_pre)

    elif method == "fpca_synth":
        scores = fpca.fpca_scores(
            panel.values[:, : spec.t0],
            basis_size=config.basis_size,
            variance_target=config.variance_target,
        )
        selection = cluster.trim_by_cluster(
            scores,
            spec.treated_index,
            k_max=config.k_max,
            restarts=config.restarts,
            seed=config.seed,
        )
        columns = [pool.index(i) for i in selection.indices]
        decomposition = lowrank.rpca(
            donor_pre[:, columns],
            lam=config.rpca_lambda,
            tol=config.rpca_tol,
            max_iter=config.rpca_max_iter,
        )
        diagnostics = dict(selection.diagnostics)
        diagnostics["rpca_iterations"] = float(decomposition.iterations)
        diagnostics["rpca_residual"] = decomposition.residual
        diagnostics["rpca_converged"] = float(decomposition.converged)
        selection = DonorSelection(selection.indices, selection.method_tag, diagnostics)
        weights = fit_nonneg(treated_pre, decomposition.L)

    else:  # fspda
        path = fselect.forward_select(
            treated_pre,
            donor_pre,
            r_max=config.r_max,
            penalty_horizon=(
                panel.n_periods - spec.t0 if config.mbic_post_penalty else None
            ),
        )
        chosen_columns = list(path.order[: path.chosen_r])
        diagnostics = {"chosen_r": float(path.chosen_r)}
        for r, (r2, mbic) in enumerate(zip(path.r2_path, path.mbic_path), start=1):
            diagnostics[f"r2_{r:03d}"] = float(r2)
            diagnostics[f"mbic_{r:03d}"] = float(mbic)
        selection = DonorSelection.build(
            [pool[j] for j in chosen_columns],
            "forward_selection",
            spec.treated_index,
            diagnostics,
        )
        weights = fit_ols(treated_pre, donor_pre[:, chosen_columns])

    series = _counterfactual(panel, spec, selection, weights)
    return selection, weights, series
