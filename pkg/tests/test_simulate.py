import numpy as np
import pandas as pd
import pytest

from robustspc.chart import RunLength
from robustspc.conventions import arl_fields, seed_default
from robustspc.simulate import Scenario, OutlierSpec, ScenarioError, inject_outliers, \
    gen_subgroups, estimate_arl, summarize_run_lengths, scenario_table, cell_seed, \
    qq_diagnostics

from .common import sigma_bivariate


def test_inject_outliers():
    rng = np.random.default_rng(51)
    x = np.zeros((200, 10, 1))
    y = inject_outliers(x, OutlierSpec(count=2, shift=3., scale=0.), rng)
    assert np.all(x == 0)
    assert np.all(np.sum(y != 0, axis=1) == 2)
    values = y[y != 0]
    assert set(np.abs(values)) == {3.}
    assert 0.4 < np.mean(values > 0) < 0.6
    # single subgroups keep their shape
    assert inject_outliers(np.zeros(10), OutlierSpec(), rng).shape == (10,)
    mv = inject_outliers(np.zeros((10, 2)), OutlierSpec(count=1, scale=0.), rng)
    assert np.sum(np.any(mv != 0, axis=1)) == 1
    assert set(np.abs(mv[mv != 0])) == {5.}
    with pytest.raises(ScenarioError):
        inject_outliers(np.zeros(5), OutlierSpec(count=5), rng)


def test_gen_subgroups():
    rng = np.random.default_rng(52)
    scenario = Scenario(dimension=2, mean=[1., -1.], cov=sigma_bivariate,
                        shift=[0.5, 0.], size=20)
    x = gen_subgroups(scenario, "I", rng)
    assert x.shape == (100, 20, 2)
    pooled = x.reshape(-1, 2)
    assert np.allclose(pooled.mean(axis=0), [1., -1.], atol=0.1)
    assert np.allclose(np.cov(pooled.T), sigma_bivariate, atol=0.1)
    y = gen_subgroups(scenario, "II", rng, 300)
    assert y.shape == (300, 20, 2)
    assert np.allclose(y.reshape(-1, 2).mean(axis=0), [1.5, -1.], atol=0.1)
    with pytest.raises(ScenarioError):
        gen_subgroups(scenario, "III", rng)


def test_phase1_contamination():
    clean = Scenario(size=10, outliers=None)
    dirty = Scenario(size=10, outliers={"count": 1})
    assert np.array_equal(gen_subgroups(clean, "I", np.random.default_rng(1)),
                          gen_subgroups(dirty, "I", np.random.default_rng(1)))
    contaminated = Scenario(size=10, outliers={"count": 1, "scale": 0.},
                            contaminate_phase1=True)
    x = gen_subgroups(contaminated, "I", np.random.default_rng(1))
    assert np.all(np.sum(np.abs(x[..., 0]) == 3, axis=1) >= 1)


def test_scenario_checks():
    assert Scenario().phase1 == 80
    assert Scenario(dimension=3).phase1 == 100
    assert np.array_equal(Scenario(dimension=2, shift=1.).shift, [1., 1.])
    outliers = Scenario(dimension=2, outliers=2).outliers
    assert outliers.count == 2 and outliers.scale == 1.
    assert np.array_equal(outliers.shift, [5., 5.])
    assert Scenario(outliers=1).outliers.scale == 3.
    for bad in [{"size": 1}, {"dimension": 2, "shift": [1., 2., 3.]},
                {"dimension": 2, "cov": [[1., 2.], [2., 1.]]},
                {"dimension": 2, "cov": [[1., 0.], [0.5, 1.]]},
                {"size": 5, "outliers": 5}, {"replications": 0}, {"seed": -1},
                {"outliers": {"count": 1, "spread": 2}}, {"mena": 0.}]:
        with pytest.raises(ScenarioError):
            Scenario.from_info(bad)
    info = Scenario(dimension=2, cov=sigma_bivariate, outliers=1, seed=3).as_dict()
    assert Scenario.from_info(info).as_dict() == info


@pytest.mark.parametrize("q", [0.1, 0.01, 0.005])
def test_geometric_run_lengths(q):
    scenario = {"size": 2, "phase1": 2, "replications": 2000, "seed": 123}
    summary = estimate_arl({"_fixed_rate": {"q": q}}, scenario)
    assert summary.replications == 2000
    assert summary.censored_count == 0
    assert abs(summary.arl - 1 / q) < 3 * summary.se_arl
    assert summary.sd_arl == pytest.approx(np.sqrt(1 - q) / q, rel=0.15)
    assert summary.arl_lower_bound == summary.arl
    always = estimate_arl({"_fixed_rate": {"q": 1.}}, dict(scenario, replications=20))
    assert always.arl == 1 and always.sd_arl == 0


def test_censored_runs():
    summary = estimate_arl({"_fixed_rate": {"q": 1e-12}},
                           {"size": 2, "phase1": 2, "replications": 5,
                            "phase2_cap": 100, "seed": 1})
    assert summary.censored_count == 5
    assert summary.arl == summary.arl_lower_bound == 100
    assert np.isnan(summary.se_arl)


def test_faults_end_runs_as_signals():
    scenario = {"size": 2, "phase1": 2, "replications": 200, "seed": 17}
    summary = estimate_arl({"_fixed_rate": {"q": 1e-12, "fault_rate": 0.05}}, scenario)
    assert summary.censored_count == 0
    assert summary.fault_count == 200
    assert abs(summary.arl - 20) < 3 * summary.se_arl
    mixed = estimate_arl({"_fixed_rate": {"q": 0.05, "fault_rate": 0.05}}, scenario)
    assert 0 < mixed.fault_count < 200
    assert abs(mixed.arl - 1 / (1 - 0.95 ** 2)) < 3 * mixed.se_arl
    clean = estimate_arl({"_fixed_rate": {"q": 0.05}}, scenario)
    assert clean.fault_count == 0
    summary = summarize_run_lengths([RunLength(3, False, True), RunLength(4, False),
                                     RunLength(10, True)], 10)
    assert summary.fault_count == 1 and summary.arl == 3.5


def test_summarize_run_lengths():
    summary = summarize_run_lengths([RunLength(5, False), RunLength(10, True)], 10)
    assert summary.arl == 5 and summary.sd_arl == 0 and summary.se_arl == 0
    assert summary.arl_lower_bound == 7.5
    assert summary.censored_count == 1 and summary.replications == 2
    summary = summarize_run_lengths([RunLength(2, False), RunLength(4, False)], 10)
    assert summary.arl == 3
    assert summary.sd_arl == pytest.approx(np.sqrt(2))
    assert summary.se_arl == pytest.approx(1)


def test_determinism():
    scenario = {"size": 5, "phase1": 30, "replications": 20, "seed": 9}
    chart = {"shewhart": None}
    assert estimate_arl(chart, scenario) == estimate_arl(chart, scenario)
    assert estimate_arl(chart, scenario).seed == 9
    unseeded = dict(scenario, seed=None)
    assert estimate_arl(chart, unseeded) == estimate_arl(chart, unseeded)
    assert estimate_arl(chart, unseeded).seed == seed_default
    assert cell_seed(1, 0, 0) == cell_seed(1, 0, 0)
    assert len({cell_seed(1, 0, 0), cell_seed(1, 0, 1), cell_seed(1, 1, 0),
                cell_seed(2, 0, 0)}) == 4


def test_scenario_table():
    scenarios = {"in_control": {"size": 2, "phase1": 2, "replications": 10},
                 "other": {"size": 2, "phase1": 2, "replications": 10}}
    charts = {"rare": {"_fixed_rate": {"q": 0.1}}, "often": {"_fixed_rate": {"q": 0.5}}}
    table = scenario_table(scenarios, charts, seed=4)
    assert list(table.columns) == list(arl_fields)
    assert list(zip(table.scenario, table.chart)) == [
        ("in_control", "rare"), ("in_control", "often"),
        ("other", "rare"), ("other", "often")]
    assert table.seed.nunique() == 4
    pd.testing.assert_frame_equal(table, scenario_table(scenarios, charts, seed=4))
    single = scenario_table({"s": scenarios["other"]}, {"c": charts["often"]}, seed=4)
    assert len(single) == 1
    # without any seed, cells still get distinct reproducible seeds
    unseeded = scenario_table(scenarios, charts)
    assert unseeded.seed.nunique() == 4
    pd.testing.assert_frame_equal(unseeded, scenario_table(scenarios, charts))
    empty = scenario_table({}, charts)
    assert empty.empty and list(empty.columns) == list(arl_fields)


def test_qq_diagnostics():
    diagnostics = qq_diagnostics(subgroups=2000, size=20, alpha=0.1, seed=5)
    assert diagnostics.normal_points.shape == diagnostics.gamma_points.shape == (2000, 2)
    assert np.all(np.diff(diagnostics.normal_points[:, 0]) > 0)
    assert diagnostics.gamma_fit.shape > 0
    assert diagnostics.ks_normal[1] > 0.01
    assert 0 <= diagnostics.ks_gamma[0] < 1
    again = qq_diagnostics(subgroups=2000, size=20, alpha=0.1, seed=5)
    assert np.array_equal(diagnostics.gamma_points, again.gamma_points)
    with pytest.raises(ValueError):
        qq_diagnostics(subgroups=5)
