"""Gaussian-process panel generator for donor-selection benchmarks.

Builds a two-pool panel: a *relevant* pool sharing one smooth latent curve
plus small unit-level noise (so a convex combination of relevant donors can
reproduce the treated unit), and an *irrelevant* pool of independent,
larger-amplitude periodic draws.  No treatment effect is injected, so the
true ATT is zero by construction.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import NumericalError
from .panel import PanelMatrix, TreatmentSpec

__all__ = [
    "KernelSpec",
    "rbf",
    "constant",
    "exp_sine_squared",
    "white",
    "ksum",
    "kprod",
    "kernel_matrix",
    "sample_gp",
    "SimConfig",
    "SimPanel",
    "make_two_pool_panel",
]

_LEAF_KINDS = ("rbf", "constant", "exp_sine_squared", "white")
_COMPOSITE_KINDS = ("sum", "product")

JITTER_START = 1e-10
JITTER_MAX = 1e-6


@dataclass(frozen=True)
class KernelSpec:
    """Covariance-function description: a leaf kernel or a sum/product tree."""

    kind: str
    lengthscale: float | None = None
    amplitude: float | None = None
    period: float | None = None
    noise: float | None = None
    children: tuple = ()

    def __post_init__(self):
        if self.kind in _COMPOSITE_KINDS:
            if len(self.children) < 2:
                raise ValueError(f"{self.kind} kernel needs at least 2 children")
        elif self.kind in _LEAF_KINDS:
            if self.children:
                raise ValueError("leaf kernels take no children")
            for name in ("lengthscale", "amplitude", "period", "noise"):
                value = getattr(self, name)
                if value is not None and value <= 0:
                    raise ValueError(f"kernel {name} must be positive")
        else:
            raise ValueError(f"unknown kernel kind {self.kind!r}")


def rbf(lengthscale: float) -> KernelSpec:
    return KernelSpec("rbf", lengthscale=lengthscale)


def constant(amplitude: float) -> KernelSpec:
    return KernelSpec("constant", amplitude=amplitude)


def exp_sine_squared(period: float, lengthscale: float) -> KernelSpec:
    return KernelSpec("exp_sine_squared", period=period, lengthscale=lengthscale)


def white(noise_var: float) -> KernelSpec:
    return KernelSpec("white", noise=noise_var)


def ksum(*children: KernelSpec) -> KernelSpec:
    return KernelSpec("sum", children=tuple(children))


def kprod(*children: KernelSpec) -> KernelSpec:
    return KernelSpec("product", children=tuple(children))


def kernel_matrix(spec: KernelSpec, times: np.ndarray) -> np.ndarray:
    """Evaluate the covariance matrix of a kernel on a strictly increasing grid."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1:
        raise ValueError("times must be a 1-D vector")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    return _kernel_rec(spec, times)


def _kernel_rec(spec, times):
    if spec.kind == "sum":
        out = _kernel_rec(spec.children[0], times)
        for child in spec.children[1:]:
            out = out + _kernel_rec(child, times)
        return out
    if spec.kind == "product":
        out = _kernel_rec(spec.children[0], times)
        for child in spec.children[1:]:
            out = out * _kernel_rec(child, times)
        return out

    dist = np.abs(times[:, None] - times[None, :])
    if spec.kind == "rbf":
        if spec.lengthscale is None:
            raise ValueError("rbf kernel needs a lengthscale")
        return np.exp(-(dist**2) / (2.0 * spec.lengthscale**2))
    if spec.kind == "constant":
        if spec.amplitude is None:
            raise ValueError("constant kernel needs an amplitude")
        return np.full_like(dist, spec.amplitude)
    if spec.kind == "exp_sine_squared":
        if spec.period is None or spec.lengthscale is None:
            raise ValueError("exp_sine_squared kernel needs period and lengthscale")
        return np.exp(
            -2.0 * np.sin(np.pi * dist / spec.period) ** 2 / spec.lengthscale**2
        )
    if spec.kind == "white":
        if spec.noise is None:
            raise ValueError("white kernel needs a noise variance")
        return spec.noise * np.eye(times.size)
    raise ValueError(f"unknown kernel kind {spec.kind!r}")


def _chol_with_jitter(K):
    jitter = 0.0
    while True:
        try:
            return np.linalg.cholesky(K + jitter * np.eye(K.shape[0]))
        except np.linalg.LinAlgError:
            jitter = JITTER_START if jitter == 0.0 else jitter * 10.0
            if jitter > JITTER_MAX:
                raise NumericalError(
                    "covariance matrix is not positive definite even after "
                    f"jitter up to {JITTER_MAX:g}"
                ) from None


def sample_gp(
    spec: KernelSpec,
    times: np.ndarray,
    n_draws: int,
    seed,
    mean: np.ndarray | None = None,
) -> np.ndarray:
    """Draw ``n_draws`` sample paths from ``N(mean, K(times))``.

    Deterministic for a fixed seed (ints and int sequences both accepted).
    The covariance factorization escalates diagonal jitter from 1e-10 by
    factors of 10 up to 1e-6 before giving up.
    """
    times = np.asarray(times, dtype=float)
    K = kernel_matrix(spec, times)
    chol = _chol_with_jitter(K)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n_draws, times.size))
    draws = z @ chol.T
    if mean is not None:
        draws = draws + np.asarray(mean, dtype=float)
    return draws


@dataclass(frozen=True)
class SimConfig:
    """Two-pool benchmark layout and kernel hyperparameters."""

    n_relevant: int = 80
    n_irrelevant: int = 80
    n_periods: int = 40
    t0: int = 30
    # Relevant pool: one shared smooth draw plus a linear trend and small
    # per-unit white noise.
    rbf_lengthscale: float = 8.0
    rbf_amplitude: float = 4.0
    trend_slope: float = 0.7
    relevant_noise_var: float = 1.0
    # Irrelevant pool: independent periodic draws, larger amplitude and noise.
    ess_period: float = 5.0
    ess_lengthscale: float = 1.0
    ess_amplitude: float = 16.0
    irrelevant_noise_var: float = 4.0

    def __post_init__(self):
        if self.n_relevant < 2 or self.n_irrelevant < 2:
            raise ValueError("each pool needs at least 2 units")
        if not 1 <= self.t0 <= self.n_periods - 1:
            raise ValueError("t0 must leave at least one post period")


@dataclass(frozen=True)
class SimPanel:
    """Simulated panel plus pool labels; the true ATT is zero by design."""

    panel: PanelMatrix
    pool_labels: tuple
    spec: TreatmentSpec
    true_att: float = 0.0


def make_two_pool_panel(config: SimConfig | None = None, seed: int = 0) -> SimPanel:
    """Generate the two-pool benchmark panel.

    The treated unit is the first relevant unit.  Every random stream is
    derived from ``(seed, stream_index)``, so per-unit draws are independent
    of generation order and the whole panel is reproducible from
    ``(config, seed)``.
    """
    if config is None:
        config = SimConfig()
    times = np.arange(config.n_periods, dtype=float)
    trend = config.trend_slope * times

    shared_kernel = kprod(rbf(config.rbf_lengthscale), constant(config.rbf_amplitude))
    shared = sample_gp(shared_kernel, times, 1, seed=[seed, 0])[0] + trend

    irrelevant_kernel = ksum(
        kprod(
            exp_sine_squared(config.ess_period, config.ess_lengthscale),
            constant(config.ess_amplitude),
        ),
        white(config.irrelevant_noise_var),
    )

    n_total = config.n_relevant + config.n_irrelevant
    values = np.empty((n_total, config.n_periods))
    noise_sd = np.sqrt(config.relevant_noise_var)
    for i in range(config.n_relevant):
        rng = np.random.default_rng([seed, i + 1])
        values[i] = shared + noise_sd * rng.standard_normal(config.n_periods)
    for i in range(config.n_irrelevant):
        unit = config.n_relevant + i
        values[unit] = sample_gp(irrelevant_kernel, times, 1, seed=[seed, unit + 1])[0]

    width = len(str(n_total - 1))
    unit_labels = tuple(
        (f"R{i:0{width}d}" if i < config.n_relevant else f"I{i:0{width}d}")
        for i in range(n_total)
    )
    pool_labels = tuple(
        "relevant" if i < config.n_relevant else "irrelevant" for i in range(n_total)
    )
    panel = PanelMatrix(values, unit_labels, tuple(range(config.n_periods)))
    return SimPanel(
        panel=panel,
        pool_labels=pool_labels,
        spec=TreatmentSpec(treated_index=0, t0=config.t0),
        true_att=0.0,
    )
