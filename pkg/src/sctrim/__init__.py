"""Algorithmic donor-pool selection and counterfactual estimation.

The package implements three synthetic-control weight estimators (simplex,
nonnegative-on-low-rank, forward-selection OLS), the donor-trimming
algorithms that feed them (functional-PCA clustering and greedy forward
selection), and a Gaussian-process panel simulator for benchmarking how
well each approach picks its donors.
"""

from .cluster import ClusterAssignment, choose_k, kmeans, silhouette_mean, trim_by_cluster
from .estimators import (
    CounterfactualSeries,
    EstimatorConfig,
    WeightVector,
    estimate,
    fit_nonneg,
    fit_ols,
    fit_simplex,
    project_simplex,
)
from .exceptions import ConfigError, DataError, NumericalError, SctrimError
from .fpca import FpcaScores, bspline_basis, fpca_scores
from .fselect import ForwardPath, forward_select, mbic_stop, r_squared
from .gpsim import KernelSpec, SimConfig, SimPanel, kernel_matrix, make_two_pool_panel, sample_gp
from .lowrank import LowRankDecomposition, rpca, singular_value_threshold, soft_threshold, svd_truncate
from .metrics import EstimateReport, att, att_percent, evaluate, placebo_in_time, post_pre_ratio, rmse
from .panel import (
    DonorSelection,
    PanelMatrix,
    TreatmentSpec,
    aggregate_blocks,
    load_panel,
    normalize_to_base,
    split_pre_post,
)

__version__ = "0.1.0"

__all__ = [
    "ClusterAssignment",
    "ConfigError",
    "CounterfactualSeries",
    "DataError",
    "DonorSelection",
    "EstimateReport",
    "EstimatorConfig",
    "ForwardPath",
    "FpcaScores",
    "KernelSpec",
    "LowRankDecomposition",
    "NumericalError",
    "PanelMatrix",
    "SctrimError",
    "SimConfig",
    "SimPanel",
    "TreatmentSpec",
    "WeightVector",
    "aggregate_blocks",
    "att",
    "att_percent",
    "bspline_basis",
    "choose_k",
    "estimate",
    "evaluate",
    "fit_nonneg",
    "fit_ols",
    "fit_simplex",
    "forward_select",
    "fpca_scores",
    "kernel_matrix",
    "kmeans",
    "load_panel",
    "make_two_pool_panel",
    "mbic_stop",
    "normalize_to_base",
    "placebo_in_time",
    "post_pre_ratio",
    "project_simplex",
    "r_squared",
    "rmse",
    "rpca",
    "sample_gp",
    "silhouette_mean",
    "singular_value_threshold",
    "soft_threshold",
    "split_pre_post",
    "svd_truncate",
    "trim_by_cluster",
]
