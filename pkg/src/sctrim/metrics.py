"""Effect metrics (ATT, RMSE, post/pre ratio) and in-time placebo runs."""

import math
from dataclasses import dataclass, field

import numpy as np

from . import estimators
from .estimators import CounterfactualSeries, DonorSelection, EstimatorConfig, WeightVector
from .panel import PanelMatrix, TreatmentSpec

__all__ = [
    "EstimateReport",
    "att",
    "att_percent",
    "rmse",
    "post_pre_ratio",
    "sum_squares_ratio",
    "evaluate",
    "placebo_in_time",
]


@dataclass(frozen=True)
class EstimateReport:
    """Everything a single estimation run reports."""

    method: str
    intervention_tag: str
    att: float
    att_per: float
    rmse_pre: float
    rmse_post: float
    ratio: float
    weights: WeightVector
    donors: DonorSelection
    series: CounterfactualSeries
    flags: dict = field(default_factory=dict)


def att(gaps: np.ndarray, spec: TreatmentSpec) -> float:
    """Mean post-intervention gap (average treatment effect on the treated)."""
    gaps = np.asarray(gaps, dtype=float)
    return float(gaps[spec.t0 :].mean())


def rmse(gaps: np.ndarray, window: str, spec: TreatmentSpec) -> float:
    """Root mean squared gap over the pre or post window."""
    gaps = np.asarray(gaps, dtype=float)
    if window == "pre":
        part = gaps[: spec.t0]
    elif window == "post":
        part = gaps[spec.t0 :]
    else:
        raise ValueError(f"window must be 'pre' or 'post', got {window!r}")
    return float(np.sqrt(np.mean(part**2)))


def post_pre_ratio(rmse_pre: float, rmse_post: float) -> float:
    """Post RMSE over pre RMSE; +inf when the pre-period fit is perfect."""
    if rmse_pre == 0.0:
        return math.inf
    return rmse_post / rmse_pre


def sum_squares_ratio(gaps: np.ndarray, spec: TreatmentSpec) -> float:
    """Ratio of post to pre summed squared gaps (unnormalized variant)."""
    gaps = np.asarray(gaps, dtype=float)
    pre = float(np.sum(gaps[: spec.t0] ** 2))
    post = float(np.sum(gaps[spec.t0 :] ** 2))
    if pre == 0.0:
        return math.inf
    return post / pre


def att_percent(gaps: np.ndarray, fitted: np.ndarray, spec: TreatmentSpec) -> float:
    """Post-period gap sum as a percentage of the counterfactual sum."""
    gaps = np.asarray(gaps, dtype=float)
    fitted = np.asarray(fitted, dtype=float)
    denom = float(fitted[spec.t0 :].sum())
    if denom == 0.0:
        return math.nan
    return 100.0 * float(gaps[spec.t0 :].sum()) / denom


def evaluate(
    panel: PanelMatrix,
    spec: TreatmentSpec,
    method: str,
    config: EstimatorConfig | None = None,
    intervention_tag: str = "main",
    ratio_literal: bool = False,
) -> EstimateReport:
    """Run one estimation and compute the full report.

    ``ratio_literal`` switches the Ratio column to the raw sum-of-squares
    form instead of the RMSE quotient.
    """
    selection, weights, series = estimators.estimate(panel, spec, method, config)
    gaps = series.gaps
    pre = rmse(gaps, "pre", spec)
    post = rmse(gaps, "post", spec)
    ratio = sum_squares_ratio(gaps, spec) if ratio_literal else post_pre_ratio(pre, post)

    flags = {}
    if pre == 0.0:
        flags["ratio_infinite"] = 1.0
    if selection.diagnostics.get("fallback_full"):
        flags["selection_fallback_full"] = 1.0

    return EstimateReport(
        method=method,
        intervention_tag=intervention_tag,
        att=att(gaps, spec),
        att_per=att_percent(gaps, series.fitted, spec),
        rmse_pre=pre,
        rmse_post=post,
        ratio=ratio,
        weights=weights,
        donors=selection,
        series=series,
        flags=flags,
    )


def min_feasible_t0(config: EstimatorConfig | None = None) -> int:
    """Smallest pre-period length the fPCA pipeline can smooth."""
    config = config or EstimatorConfig()
    if config.basis_size is not None:
        return max(4, config.basis_size + 1)
    # Default basis is t0 // 2 and a cubic basis needs 4 functions.
    return 8


def placebo_in_time(
    panel: PanelMatrix,
    spec: TreatmentSpec,
    method: str,
    placebo_t0: int,
    config: EstimatorConfig | None = None,
    ratio_literal: bool = False,
) -> EstimateReport:
    """Re-estimate with an artificially earlier intervention date.

    The whole pipeline reruns (including donor re-trimming) with
    ``t0 = placebo_t0``; the post window extends from the placebo date to
    the end of the panel.  ``placebo_t0`` must be strictly earlier than the
    real date.
    """
    if placebo_t0 >= spec.t0:
        raise ValueError(
            f"placebo_t0={placebo_t0} must be strictly smaller than t0={spec.t0}"
        )
    if method == "fpca_synth":
        needed = min_feasible_t0(config)
        if placebo_t0 < needed:
            raise ValueError(
                f"placebo_t0={placebo_t0} too small for the fPCA smoother; "
                f"needs at least {needed} pre-intervention periods"
            )
    placebo_spec = TreatmentSpec(spec.treated_index, placebo_t0)
    return evaluate(
        panel,
        placebo_spec,
        method,
        config,
        intervention_tag="placebo",
        ratio_literal=ratio_literal,
    )
