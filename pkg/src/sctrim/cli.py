"""Command-line interface: simulate | fit | placebo | benchmark.

Options may come from a JSON config file (``--config``), from flags, or
from built-in defaults; flags win over the file.  Every run writes the
fully resolved option set to ``config_snapshot.json`` so results are
auditable, and all outputs are byte-reproducible from (inputs, config,
seed).

Exit codes: 0 success, 1 usage/configuration error, 2 data error,
3 numerical failure.
"""

import argparse
import csv
import json
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import gpsim, metrics, plots
from .estimators import METHODS, EstimatorConfig
from .exceptions import ConfigError, DataError, NumericalError
from .panel import aggregate_blocks, load_panel, normalize_to_base, TreatmentSpec

# Weights at or below this magnitude are treated as zero in reports.
WEIGHT_EPS = 1e-6


@dataclass
class RunConfig:
    """Resolved options shared by the subcommands."""

    # data ingestion
    input: str | None = None
    format: str = "wide"
    treated: str | None = None
    t0: int | None = None
    t0_label: str | None = None
    normalize: str = "none"
    aggregate: int = 1
    # estimation
    methods: str = "osc,fpca_synth,fspda"
    seed: int | None = None
    rpca_lambda: float | None = None
    rpca_tol: float = 1e-7
    rpca_max_iter: int = 1000
    fpca_basis: int | None = None
    fpca_variance: float = 0.95
    k_max: int | None = None
    restarts: int = 10
    r_max: int | None = None
    mbic_post_penalty: bool = False
    ratio_literal: bool = False
    # placebo
    placebo_t0: int | None = None
    placebo_t0_label: str | None = None
    # simulation / benchmark
    relevant: int = 80
    irrelevant: int = 80
    periods: int = 40
    sim_t0: int = 30
    rbf_lengthscale: float = 8.0
    rbf_amplitude: float = 4.0
    trend_slope: float = 0.7
    relevant_noise_var: float = 1.0
    ess_period: float = 5.0
    ess_lengthscale: float = 1.0
    ess_amplitude: float = 16.0
    irrelevant_noise_var: float = 4.0
    replications: int = 20
    # output
    out: str = "."


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, config-file values, and explicit flags (flags win)."""
    file_values = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            file_values = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(file_values, dict):
            raise ConfigError("config file must contain a JSON object")

    config = RunConfig()
    known = {f.name for f in fields(RunConfig)}
    for key, value in file_values.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        setattr(config, key, value)
    for key in known:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            setattr(config, key, flag_value)
    return config


def _estimator_config(config: RunConfig) -> EstimatorConfig:
    return EstimatorConfig(
        rpca_lambda=config.rpca_lambda,
        rpca_tol=config.rpca_tol,
        rpca_max_iter=config.rpca_max_iter,
        basis_size=config.fpca_basis,
        variance_target=config.fpca_variance,
        k_max=config.k_max,
        restarts=config.restarts,
        r_max=config.r_max,
        mbic_post_penalty=config.mbic_post_penalty,
        seed=config.seed if config.seed is not None else 0,
    )


def _sim_config(config: RunConfig) -> gpsim.SimConfig:
    return gpsim.SimConfig(
        n_relevant=config.relevant,
        n_irrelevant=config.irrelevant,
        n_periods=config.periods,
        t0=config.sim_t0,
        rbf_lengthscale=config.rbf_lengthscale,
        rbf_amplitude=config.rbf_amplitude,
        trend_slope=config.trend_slope,
        relevant_noise_var=config.relevant_noise_var,
        ess_period=config.ess_period,
        ess_lengthscale=config.ess_lengthscale,
        ess_amplitude=config.ess_amplitude,
        irrelevant_noise_var=config.irrelevant_noise_var,
    )


# ---------------------------------------------------------------------------
# deterministic writers


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_wide_csv(path, panel):
    header = ["unit"] + [str(t) for t in panel.time_labels]
    rows = [
        [label] + list(panel.values[i])
        for i, label in enumerate(panel.unit_labels)
    ]
    _write_csv(path, header, rows)


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _write_snapshot(outdir: Path, config: RunConfig, command: str):
    payload = {"command": command, **asdict(config)}
    _write_json(outdir / "config_snapshot.json", payload)


def _report_payload(report, panel):
    weights = {}
    for idx, value in zip(report.donors.indices, report.weights.weights):
        if abs(value) > WEIGHT_EPS:
            weights[panel.unit_labels[idx]] = float(value)
    diagnostics = {k: float(v) for k, v in report.donors.diagnostics.items()}
    diagnostics.update({k: float(v) for k, v in report.flags.items()})
    if report.weights.intercept is not None:
        diagnostics["intercept"] = report.weights.intercept
    tag = "Main Intervention" if report.intervention_tag == "main" else "Placebo Intervention"
    return {
        "method": report.method,
        "intervention": tag,
        "ATT_per": report.att_per,
        "ATT": report.att,
        "RMSE": report.rmse_pre,
        "PostRMSE": report.rmse_post,
        "Ratio": report.ratio,
        "weights": weights,
        "donors": [panel.unit_labels[i] for i in report.donors.indices],
        "diagnostics": diagnostics,
    }


def _write_report_files(outdir: Path, stem: str, report, panel, spec):
    _write_json(outdir / f"report_{stem}.json", _report_payload(report, panel))
    observed = panel.values[spec.treated_index]
    rows = [
        [panel.time_labels[t], observed[t], report.series.fitted[t], report.series.gaps[t]]
        for t in range(panel.n_periods)
    ]
    _write_csv(outdir / f"counterfactual_{stem}.csv", ["time", "observed", "fitted", "gap"], rows)
    plots.plot_counterfactual(
        outdir / f"plot_{stem}.svg",
        panel.time_labels,
        observed,
        report.series.fitted,
        spec.t0,
        title=f"{report.method} ({report.intervention_tag})",
    )


# ---------------------------------------------------------------------------
# subcommands


def _parse_methods(config: RunConfig):
    names = [m.strip() for m in config.methods.split(",") if m.strip()]
    for name in names:
        if name not in METHODS:
            raise ConfigError(f"unknown method {name!r}; choose from {', '.join(METHODS)}")
    if not names:
        raise ConfigError("no methods requested")
    return names


def _load_input_panel(config: RunConfig):
    if not config.input:
        raise ConfigError("--input is required")
    panel = load_panel(config.input, config.format)
    if config.aggregate > 1:
        panel = aggregate_blocks(panel, config.aggregate)
    panel = normalize_to_base(panel, config.normalize)
    if not config.treated:
        raise ConfigError("--treated is required")
    treated_index = panel.unit_index(config.treated)

    if config.t0_label is not None:
        wanted = config.t0_label
        labels = [str(t) for t in panel.time_labels]
        if wanted not in labels:
            raise ConfigError(f"t0 label {wanted!r} not found among time labels")
        t0 = labels.index(wanted)
    elif config.t0 is not None:
        t0 = int(config.t0)
    else:
        raise ConfigError("one of --t0 or --t0-label is required")
    spec = TreatmentSpec(treated_index, t0)
    spec.validate(panel)
    return panel, spec


def cmd_simulate(config: RunConfig) -> int:
    if config.seed is None:
        raise ConfigError("--seed is required for simulate")
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)
    sim = gpsim.make_two_pool_panel(_sim_config(config), seed=config.seed)
    _write_wide_csv(outdir / "panel.csv", sim.panel)
    _write_csv(
        outdir / "pool_labels.csv",
        ["unit", "pool"],
        [[label, pool] for label, pool in zip(sim.panel.unit_labels, sim.pool_labels)],
    )
    _write_snapshot(outdir, config, "simulate")
    return 0


def cmd_fit(config: RunConfig) -> int:
    methods = _parse_methods(config)
    if config.seed is None and any(m == "fpca_synth" for m in methods):
        raise ConfigError("--seed is required when fitting fpca_synth")
    panel, spec = _load_input_panel(config)
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)
    est_config = _estimator_config(config)
    for method in methods:
        report = metrics.evaluate(
            panel, spec, method, est_config, ratio_literal=config.ratio_literal
        )
        _write_report_files(outdir, method, report, panel, spec)
    _write_snapshot(outdir, config, "fit")
    return 0


_SUMMARY_HEADER = ["Method", "Intervention", "ATT_per", "ATT", "RMSE", "PostRMSE", "Ratio"]


def cmd_placebo(config: RunConfig) -> int:
    methods = _parse_methods(config)
    if config.seed is None and any(m == "fpca_synth" for m in methods):
        raise ConfigError("--seed is required when fitting fpca_synth")
    panel, spec = _load_input_panel(config)

    if config.placebo_t0_label is not None:
        labels = [str(t) for t in panel.time_labels]
        if config.placebo_t0_label not in labels:
            raise ConfigError(
                f"placebo t0 label {config.placebo_t0_label!r} not found among time labels"
            )
        placebo_t0 = labels.index(config.placebo_t0_label)
    elif config.placebo_t0 is not None:
        placebo_t0 = int(config.placebo_t0)
    else:
        raise ConfigError("one of --placebo-t0 or --placebo-t0-label is required")
    if placebo_t0 >= spec.t0:
        raise ConfigError(
            f"placebo_t0={placebo_t0} must be strictly earlier than t0={spec.t0}"
        )

    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)
    est_config = _estimator_config(config)
    summary_rows = []
    for method in methods:
        main_report = metrics.evaluate(
            panel, spec, method, est_config, ratio_literal=config.ratio_literal
        )
        _write_report_files(outdir, f"{method}_main", main_report, panel, spec)
        placebo_report = metrics.placebo_in_time(
            panel, spec, method, placebo_t0, est_config, ratio_literal=config.ratio_literal
        )
        placebo_spec = TreatmentSpec(spec.treated_index, placebo_t0)
        _write_report_files(outdir, f"{method}_placebo", placebo_report, panel, placebo_spec)
        for report in (main_report, placebo_report):
            tag = "Main Intervention" if report.intervention_tag == "main" else "Placebo Intervention"
            summary_rows.append(
                [report.method, tag, report.att_per, report.att,
                 report.rmse_pre, report.rmse_post, report.ratio]
            )
    _write_csv(outdir / "summary.csv", _SUMMARY_HEADER, summary_rows)
    _write_snapshot(outdir, config, "placebo")
    return 0


_BENCH_HEADER = [
    "seed", "method", "n_selected", "n_selected_irrelevant",
    "n_weighted", "n_weighted_irrelevant",
    "att", "att_per", "rmse_pre", "rmse_post", "ratio",
]


def cmd_benchmark(config: RunConfig) -> int:
    if config.seed is None:
        raise ConfigError("--seed is required for benchmark")
    if config.replications < 1:
        raise ConfigError("--replications must be at least 1")
    methods = _parse_methods(config)
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)
    sim_config = _sim_config(config)

    rows = []
    for rep in range(config.replications):
        seed = config.seed + rep
        sim = gpsim.make_two_pool_panel(sim_config, seed=seed)
        est_config = _estimator_config(config).with_overrides(seed=seed)
        for method in methods:
            report = metrics.evaluate(
                sim.panel, sim.spec, method, est_config,
                ratio_literal=config.ratio_literal,
            )
            selected = list(report.donors.indices)
            weighted = [
                i for i, w in zip(selected, report.weights.weights)
                if abs(w) > WEIGHT_EPS
            ]
            irrelevant = {i for i, p in enumerate(sim.pool_labels) if p == "irrelevant"}
            rows.append([
                seed, method,
                len(selected), sum(1 for i in selected if i in irrelevant),
                len(weighted), sum(1 for i in weighted if i in irrelevant),
                report.att, report.att_per, report.rmse_pre, report.rmse_post,
                report.ratio,
            ])
    _write_csv(outdir / "benchmark_runs.csv", _BENCH_HEADER, rows)

    aggregate_rows = []
    for method in methods:
        sub = [r for r in rows if r[1] == method]
        att_abs = [abs(r[6]) for r in sub]
        ratios = [r[10] for r in sub]
        aggregate_rows.append([
            method,
            len(sub),
            float(np.mean([r[2] for r in sub])),
            float(np.mean([r[3] for r in sub])),
            float(np.mean([r[4] for r in sub])),
            float(np.mean([r[5] for r in sub])),
            float(np.median(att_abs)),
            float(np.median([r[8] for r in sub])),
            float(np.median([r[9] for r in sub])),
            float(np.median(ratios)),
        ])
    _write_csv(
        outdir / "benchmark_aggregate.csv",
        ["method", "replications", "mean_selected", "mean_selected_irrelevant",
         "mean_weighted", "mean_weighted_irrelevant", "median_abs_att",
         "median_rmse_pre", "median_rmse_post", "median_ratio"],
        aggregate_rows,
    )
    _write_snapshot(outdir, config, "benchmark")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _add_common(sub):
    sub.add_argument("--config", help="JSON config file; flags override its values")
    sub.add_argument("--out", help="output directory (default: current)")
    sub.add_argument("--seed", type=int, help="random seed")


def _add_estimation(sub):
    sub.add_argument("--methods", help="comma-separated subset of: " + ",".join(METHODS))
    sub.add_argument("--rpca-lambda", dest="rpca_lambda", type=float,
                     help="RPCA sparsity weight (default 1/sqrt(max(m,n)))")
    sub.add_argument("--rpca-tol", dest="rpca_tol", type=float)
    sub.add_argument("--rpca-max-iter", dest="rpca_max_iter", type=int)
    sub.add_argument("--fpca-basis", dest="fpca_basis", type=int,
                     help="spline basis size (default min(t0//2, 15))")
    sub.add_argument("--fpca-variance", dest="fpca_variance", type=float,
                     help="explained-variance target for the score dimension")
    sub.add_argument("--k-max", dest="k_max", type=int, help="largest k tried by choose_k")
    sub.add_argument("--restarts", type=int, help="k-means restarts")
    sub.add_argument("--r-max", dest="r_max", type=int, help="forward-selection cap")
    sub.add_argument("--mbic-post-penalty", dest="mbic_post_penalty",
                     action=argparse.BooleanOptionalAction, default=None,
                     help="penalize the stopping rule by the post-period length")
    sub.add_argument("--ratio-literal", dest="ratio_literal",
                     action=argparse.BooleanOptionalAction, default=None,
                     help="report the raw sum-of-squares ratio instead of the RMSE quotient")


def _add_ingestion(sub):
    sub.add_argument("--input", help="panel CSV path")
    sub.add_argument("--format", choices=["wide", "long"], default=None)
    sub.add_argument("--treated", help="treated unit label")
    sub.add_argument("--t0", type=int, help="number of pre-intervention periods")
    sub.add_argument("--t0-label", dest="t0_label",
                     help="time label of the first post-intervention period")
    sub.add_argument("--normalize", choices=["none", "first_period_100"], default=None)
    sub.add_argument("--aggregate", type=int,
                     help="average every N consecutive periods before fitting")


def _add_simulation(sub):
    sub.add_argument("--relevant", type=int, help="relevant pool size")
    sub.add_argument("--irrelevant", type=int, help="irrelevant pool size")
    sub.add_argument("--periods", type=int, help="number of time periods")
    sub.add_argument("--sim-t0", dest="sim_t0", type=int,
                     help="pre-intervention period count in the simulation")
    sub.add_argument("--rbf-lengthscale", dest="rbf_lengthscale", type=float)
    sub.add_argument("--rbf-amplitude", dest="rbf_amplitude", type=float)
    sub.add_argument("--trend-slope", dest="trend_slope", type=float)
    sub.add_argument("--relevant-noise-var", dest="relevant_noise_var", type=float)
    sub.add_argument("--ess-period", dest="ess_period", type=float)
    sub.add_argument("--ess-lengthscale", dest="ess_lengthscale", type=float)
    sub.add_argument("--ess-amplitude", dest="ess_amplitude", type=float)
    sub.add_argument("--irrelevant-noise-var", dest="irrelevant_noise_var", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sctrim", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("simulate", help="generate a two-pool benchmark panel")
    _add_common(sim)
    _add_simulation(sim)

    fit = subs.add_parser("fit", help="estimate counterfactuals on a panel CSV")
    _add_common(fit)
    _add_ingestion(fit)
    _add_estimation(fit)

    plac = subs.add_parser("placebo", help="fit plus an in-time placebo re-estimation")
    _add_common(plac)
    _add_ingestion(plac)
    _add_estimation(plac)
    plac.add_argument("--placebo-t0", dest="placebo_t0", type=int,
                      help="pre-period count for the placebo date")
    plac.add_argument("--placebo-t0-label", dest="placebo_t0_label",
                      help="time label of the placebo intervention")

    bench = subs.add_parser("benchmark", help="replicate simulate+fit and summarize")
    _add_common(bench)
    _add_simulation(bench)
    _add_estimation(bench)
    bench.add_argument("--replications", type=int, help="number of seeded replications")

    return parser


_COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "placebo": cmd_placebo,
    "benchmark": cmd_benchmark,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = _resolve_config(args)
        return _COMMANDS[args.command](config)
    except ConfigError as exc:
        print(f"sctrim: usage error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"sctrim: invalid parameter: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"sctrim: data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"sctrim: numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
