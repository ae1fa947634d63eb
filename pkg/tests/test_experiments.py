import math

import numpy as np
import pytest

from ratchet.exceptions import MetricUndefinedError, NoSignChangeError
from ratchet.models import KickOrder, RatchetParams
from ratchet.services import experiments, observables


def params_at(kappa_pi=1.0, P=0.5, **kwargs):
    return RatchetParams.from_kappa_pi(kappa_pi, strength_P=P, **kwargs)


@pytest.fixture(scope="module")
def resonance_records():
    return experiments.time_series_experiment(params_at(eta=0.5), 200)


@pytest.fixture(scope="module")
def baseline_records():
    return experiments.time_series_experiment(params_at(eta=0.0), 200)


def test_default_sweep_grids():
    assert experiments.DEFAULT_ETAS == (1 / 7, 2 / 7, 3 / 8, 1 / 2, 5 / 9, 2 / 3, 7 / 10, 4 / 5)
    grid = experiments.default_kappa_pi_grid()
    assert len(grid) == 80
    assert grid[0] == 0.05 and grid[-1] == 4.0
    for named in (0.5, 1.0, 2.625, 3.0):
        assert min(abs(value - named) for value in grid) < 0.05


def test_early_time_current_averages_the_window(resonance_records):
    expected = np.mean([r.mean_k for r in resonance_records[9:40]])
    assert experiments.early_time_current(resonance_records) == pytest.approx(expected)
    with pytest.raises(ValueError):
        experiments.early_time_current(resonance_records[:5])


@pytest.mark.slow
def test_accelerated_current_at_half_delay(resonance_records, baseline_records):
    slope, _, r_squared = experiments.accelerated_current_fit(resonance_records, (50, 200))
    assert r_squared >= 0.99
    assert slope != 0
    assert abs(resonance_records[-1].mean_k) >= 5 * abs(baseline_records[-1].mean_k)


@pytest.mark.slow
def test_desynchronized_kicks_absorb_less_energy(resonance_records, baseline_records):
    assert resonance_records[-1].mean_k2 < baseline_records[-1].mean_k2


@pytest.mark.slow
def test_period_force_settles_to_the_current_growth_rate(resonance_records):
    slope, _, _ = experiments.accelerated_current_fit(resonance_records, (50, 200))
    force = np.mean([r.period_force for r in resonance_records if 100 <= r.t <= 200])
    assert force != 0
    assert -force == pytest.approx(slope, rel=0.05)


@pytest.mark.slow
def test_strength_sweep_configurations_ordering():
    results = experiments.strength_sweep_configurations(params_at(), [0.0, 0.5], 200)
    assert set(results) == {(0.5, 0.0), (0.5, 0.5), (1.0, 0.0), (1.0, 0.5)}
    for result in results.values():
        assert result.mean_k_final[0] == 0.0
    final = {key: abs(result.mean_k_final[1]) for key, result in results.items()}
    assert final[(1.0, 0.5)] > final[(0.5, 0.5)] > final[(0.5, 0.0)]


def test_strength_sweep_is_deterministic():
    params = params_at(eta=0.5)
    first = experiments.strength_sweep(params, [0.25, 0.5], 30)
    second = experiments.strength_sweep(params, [0.25, 0.5], 30)
    assert first.mean_k_final == second.mean_k_final
    assert first.parameter == "strength_P"


def test_parallel_sweep_matches_sequential():
    params = params_at(eta=0.5)
    sequential = experiments.kappa_sweep(params, [0.5 * math.pi, math.pi, 1.5 * math.pi], 30, workers=1)
    parallel = experiments.kappa_sweep(params, [0.5 * math.pi, math.pi, 1.5 * math.pi], 30, workers=2)
    assert parallel.mean_k_final == sequential.mean_k_final


def test_kappa_sweep_fixes_half_delay_and_keeps_order():
    params = params_at(eta=0.0, kick_order=KickOrder.V2_FIRST)
    result = experiments.kappa_sweep(params, [math.pi], 5)
    assert result.params.eta == 0.5
    assert result.params.kick_order == KickOrder.V2_FIRST


def test_eta_sweep_rows():
    result = experiments.eta_sweep(params_at(), n_periods=40)
    assert result.values == list(experiments.DEFAULT_ETAS)
    assert len(result.series) == 8
    assert all(len(series) == 40 for series in result.series)
    assert len(result.early_mean_k) == 8
    assert result.mean_k_final == [series[-1] for series in result.series]


def test_eta_sweep_conserves_norm():
    for eta in experiments.DEFAULT_ETAS:
        records = experiments.time_series_experiment(params_at(eta=eta), 60)
        assert max(r.norm_error for r in records) < 1e-10


def test_reversal_metric_undefined_without_second_harmonic():
    with pytest.raises(MetricUndefinedError, match="metric undefined"):
        experiments.order_reversal_difference(params_at(alpha=0.0), 50)


def test_find_reversal_bisects_to_width(monkeypatch):
    monkeypatch.setattr(experiments, "_final_mean_k", lambda point: point[0].strength_P - 2.6)
    strength = experiments.find_reversal_strength(params_at(), (2.0, 3.0), 200, width=0.01)
    assert strength == pytest.approx(2.6, abs=0.01)


def test_find_reversal_without_sign_change(monkeypatch):
    monkeypatch.setattr(experiments, "_final_mean_k", lambda point: 1.0)
    with pytest.raises(NoSignChangeError):
        experiments.find_reversal_strength(params_at(), (2.0, 3.0), 200)


@pytest.mark.slow
@pytest.mark.parametrize("P,expected,tolerance", [(1.0, 0.007, 0.004), (3.0, 0.004, 0.003)])
def test_kick_order_barely_changes_the_current(P, expected, tolerance):
    metric = experiments.order_reversal_difference(params_at(P=P, eta=0.5), 200)
    assert metric == pytest.approx(expected, abs=tolerance)


@pytest.mark.slow
def test_current_reverses_near_the_same_strength_for_both_orders():
    first = experiments.find_reversal_strength(params_at(eta=0.5), (2.0, 3.0), 200)
    second = experiments.find_reversal_strength(
        params_at(eta=0.5, kick_order=KickOrder.V2_FIRST), (2.0, 3.0), 200
    )
    assert 2.4 <= first <= 2.8
    assert abs(first - second) < 0.1


@pytest.mark.slow
def test_kappa_sweep_resonances():
    grid = experiments.default_kappa_pi_grid()
    weak = experiments.kappa_sweep(params_at(P=0.5), [k * math.pi for k in grid], 200)
    currents = np.abs(weak.mean_k_final)
    largest = sorted(np.argsort(currents)[-2:])
    assert [grid[i] for i in largest] == [1.0, 3.0]

    strong = experiments.kappa_sweep(params_at(P=1.5), [k * math.pi for k in grid], 200)
    strong_currents = np.abs(strong.mean_k_final)
    at_2625 = abs(
        experiments.kappa_sweep(params_at(P=1.5), [2.625 * math.pi], 200).mean_k_final[0]
    )
    assert at_2625 > np.median(strong_currents)
    assert np.mean(strong_currents) >= np.mean(currents)


@pytest.fixture(scope="module")
def default_eta_sweep():
    return experiments.eta_sweep(params_at(), n_periods=200)


@pytest.mark.slow
def test_short_and_long_delays_drive_opposite_early_currents(default_eta_sweep):
    early = dict(zip(default_eta_sweep.values, default_eta_sweep.early_mean_k))
    assert early[1 / 7] * early[4 / 5] < 0


@pytest.mark.slow
def test_only_half_delay_accelerates(default_eta_sweep):
    linear = []
    for eta, series in zip(default_eta_sweep.values, default_eta_sweep.series):
        _, _, r_squared = observables.slope_fit(list(enumerate(series, start=1)), (50, 200))
        if r_squared >= 0.99:
            linear.append(eta)
    assert linear == [0.5]
