import math

import numpy as np
import pytest

from sctrim import (
    EstimatorConfig,
    TreatmentSpec,
    att,
    att_percent,
    evaluate,
    make_two_pool_panel,
    placebo_in_time,
    post_pre_ratio,
    rmse,
)
from sctrim.metrics import min_feasible_t0, sum_squares_ratio
from tests.test_estimators import zero_effect_panel


SPEC = TreatmentSpec(treated_index=0, t0=3)


def test_att_constant_gap():
    gaps = np.array([0.1, -0.2, 0.0, 5.0, 5.0])
    assert att(gaps, SPEC) == pytest.approx(5.0)


def test_att_symmetry():
    gaps = np.array([0.0, 0.0, 0.0, 3.0, -3.0])
    assert att(gaps, SPEC) == pytest.approx(0.0)


def test_att_linear_in_gaps():
    rng = np.random.default_rng(70)
    g1, g2 = rng.normal(size=6), rng.normal(size=6)
    spec = TreatmentSpec(0, 2)
    assert att(2.0 * g1 + g2, spec) == pytest.approx(2.0 * att(g1, spec) + att(g2, spec))


def test_rmse_windows():
    gaps = np.array([3.0, 4.0, 0.0, 1.0, 1.0])
    spec = TreatmentSpec(0, 2)
    assert rmse(gaps, "pre", spec) == pytest.approx(math.sqrt(12.5))
    assert rmse(gaps, "post", spec) == pytest.approx(math.sqrt(2.0 / 3.0))
    assert rmse(np.zeros(5), "pre", spec) == 0.0
    assert rmse(np.full(5, -2.5), "pre", spec) == pytest.approx(2.5)
    with pytest.raises(ValueError):
        rmse(gaps, "middle", spec)


def test_rmse_absolutely_homogeneous():
    rng = np.random.default_rng(71)
    gaps = rng.normal(size=8)
    spec = TreatmentSpec(0, 5)
    assert rmse(-3.0 * gaps, "pre", spec) == pytest.approx(3.0 * rmse(gaps, "pre", spec))


def test_ratio_paper_fixtures():
    assert post_pre_ratio(3.355, 24.583) == pytest.approx(7.327, abs=1e-3)
    assert post_pre_ratio(17.867, 37.213) == pytest.approx(2.083, abs=1e-3)
    assert post_pre_ratio(2.67, 2.604) == pytest.approx(0.975, abs=1e-3)


def test_ratio_perfect_pre_fit_sentinel():
    assert post_pre_ratio(0.0, 1.0) == math.inf


def test_sum_squares_ratio_literal_form():
    gaps = np.array([1.0, 2.0, 3.0, 4.0])
    spec = TreatmentSpec(0, 2)
    assert sum_squares_ratio(gaps, spec) == pytest.approx(25.0 / 5.0)


def test_att_percent_definitional():
    spec = TreatmentSpec(0, 1)
    fitted = np.array([100.0, 100.0, 100.0])
    gaps = np.array([0.0, 10.0, 10.0])
    assert att_percent(gaps, fitted, spec) == pytest.approx(10.0)
    assert att_percent(np.zeros(3), fitted, spec) == 0.0


def test_att_percent_zero_denominator_sentinel():
    spec = TreatmentSpec(0, 1)
    assert math.isnan(att_percent(np.ones(3), np.zeros(3), spec))


def test_att_percent_algebraic_identity():
    rng = np.random.default_rng(72)
    spec = TreatmentSpec(0, 4)
    gaps = rng.normal(size=10)
    fitted = rng.uniform(1, 5, size=10)
    expected = 100.0 * att(gaps, spec) / fitted[4:].mean()
    assert att_percent(gaps, fitted, spec) == pytest.approx(expected, abs=1e-10)


def test_report_invariants_on_zero_effect_panel():
    panel, spec = zero_effect_panel()
    report = evaluate(panel, spec, "osc", EstimatorConfig(seed=0))
    assert report.intervention_tag == "main"
    assert report.rmse_pre >= 0 and report.rmse_post >= 0
    assert report.ratio * report.rmse_pre == pytest.approx(report.rmse_post, abs=1e-9)
    np.testing.assert_allclose(
        report.series.gaps, panel.values[0] - report.series.fitted, atol=0
    )


def test_report_ratio_literal_flag():
    panel, spec = zero_effect_panel()
    report = evaluate(panel, spec, "fspda", EstimatorConfig(seed=0), ratio_literal=True)
    expected = sum_squares_ratio(report.series.gaps, spec)
    assert report.ratio == pytest.approx(expected)


def test_placebo_requires_strictly_earlier_date():
    panel, spec = zero_effect_panel()
    with pytest.raises(ValueError, match="strictly smaller"):
        placebo_in_time(panel, spec, "osc", spec.t0)
    with pytest.raises(ValueError, match="strictly smaller"):
        placebo_in_time(panel, spec, "osc", spec.t0 + 1)


def test_placebo_tagged_and_zero_effect():
    panel, spec = zero_effect_panel()
    report = placebo_in_time(panel, spec, "osc", 10, EstimatorConfig(seed=0))
    assert report.intervention_tag == "placebo"
    assert abs(report.att) < 1e-4
    # Post window runs from the placebo date to the end of the panel.
    assert report.series.gaps[10:].size == panel.n_periods - 10


def test_placebo_fpca_feasibility_error_names_minimum():
    panel, spec = zero_effect_panel()
    with pytest.raises(ValueError, match="at least 8"):
        placebo_in_time(panel, spec, "fpca_synth", 5, EstimatorConfig(seed=0))
    assert min_feasible_t0(EstimatorConfig(basis_size=6)) == 7


def test_placebo_gp_benchmark_ratio_stability():
    sim = make_two_pool_panel(seed=0)
    config = EstimatorConfig(seed=0)
    main = evaluate(sim.panel, sim.spec, "fpca_synth", config)
    placebo = placebo_in_time(sim.panel, sim.spec, "fpca_synth", 20, config)
    factor = placebo.ratio / main.ratio
    assert 1.0 / 3.0 < factor < 3.0
