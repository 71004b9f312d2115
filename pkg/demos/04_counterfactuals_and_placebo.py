"""Fit all three estimators on the benchmark and stress them with a placebo.

The true treatment effect is zero by construction, so a good method should
report a small ATT and a post/pre RMSE ratio near one.  The in-time placebo
moves the intervention ten periods earlier and re-runs everything; a method
that only looked good by overfitting falls apart here.
"""

from sctrim import EstimatorConfig, evaluate, make_two_pool_panel, placebo_in_time
from sctrim.estimators import METHODS

sim = make_two_pool_panel(seed=5)
config = EstimatorConfig(seed=5)

header = f"{'method':12s} {'intervention':10s} {'ATT':>8s} {'RMSE':>8s} {'PostRMSE':>9s} {'Ratio':>12s} {'donors':>7s}"
print(header)
print("-" * len(header))
for method in METHODS:
    main = evaluate(sim.panel, sim.spec, method, config)
    placebo = placebo_in_time(sim.panel, sim.spec, method, placebo_t0=20, config=config)
    for report in (main, placebo):
        print(
            f"{report.method:12s} {report.intervention_tag:10s} "
            f"{report.att:8.3f} {report.rmse_pre:8.3f} {report.rmse_post:9.3f} "
            f"{report.ratio:12.3g} {len(report.donors.indices):7d}"
        )

print(
    "\nreading the table: the clustering route (fpca_synth) keeps its ratio"
    "\nnear one at both dates, the simplex fit (osc) drifts moderately, and"
    "\nforward selection (fspda) shows the huge ratio of a pre-period overfit."
)

irrelevant = {i for i, p in enumerate(sim.pool_labels) if p == "irrelevant"}
report = evaluate(sim.panel, sim.spec, "fpca_synth", config)
weighted = [
    (i, sim.panel.unit_labels[i])
    for i, w in zip(report.donors.indices, report.weights.weights)
    if w > 1e-6
]
bad = [label for i, label in weighted if i in irrelevant]
print(f"\nfpca_synth gave weight to {len(weighted)} donors: {[u for _, u in weighted]}")
print(f"from the irrelevant pool: {len(bad)}")
