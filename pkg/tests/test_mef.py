import numpy as np
import pytest

from mefkit import dispatch, mef
from mefkit.dispatch import windows_for
from mefkit.model import PlantCluster, Scenario, StorageUnit, TimeSeries
from mefkit.toys import START, toy_de_3tech, toy_merit_order, toy_with_res
from oracles import merit_order_mef


def test_perturbation_plan_one_day():
    plan = mef.perturbation_plan(24)
    assert len(plan) == 24
    assert all(day == 0 for day, _ in plan)
    assert [h for _, h in plan] == list(range(24))


def test_perturbation_plan_year():
    # a normal year: 8760 hour jobs spread over 365 windows
    plan = mef.perturbation_plan(8760)
    assert len(plan) == 8760
    assert len({day for day, _ in plan}) == 365
    assert sorted(h for _, h in plan) == list(range(8760))


def test_perturbation_plan_two_days():
    plan = mef.perturbation_plan(48)
    assert [day for day, _ in plan[:24]] == [0] * 24
    assert [day for day, _ in plan[24:]] == [1] * 24


def test_toy_mef_matches_merit_order_oracle(toy3):
    baseline = dispatch.run_year(toy3)
    series = mef.incremental_mef(toy3, baseline)
    facts = toy_merit_order()
    demand = toy3.demand["DE"].values
    for t in range(toy3.hours):
        oracle = merit_order_mef(facts["caps"], facts["rates"], demand[t])
        assert series.values[t] == pytest.approx(oracle, abs=1e-6), f"hour {t}"
    assert series.source == "incremental"
    assert (series.values >= 0.0).all()


def test_gas_marginal_hour_is_point_four():
    scenario = Scenario(
        name="gas_only", start=START, hours=24, nodes=["DE"], years=[2030],
        clusters=[PlantCluster("g", "DE", "gas", installed_cap=50.0,
                               efficiency=0.5, carbon_content=0.2,
                               cvar_full=30.0)],
        storages=[], interconnectors=[],
        demand={"DE": TimeSeries(START, np.full(24, 10.0))},
    ).validate()
    baseline = dispatch.run_year(scenario)
    series = mef.incremental_mef(scenario, baseline)
    assert np.allclose(series.values, 0.4, atol=1e-8)


def test_curtailment_hours_have_zero_mef():
    scenario = toy_with_res(2)
    baseline = dispatch.run_year(scenario)
    series = mef.incremental_mef(scenario, baseline)
    curtailing = baseline.curt[1] > 0.5
    assert curtailing.sum() >= 8  # the fixture curtails around midday
    assert np.allclose(series.values[curtailing], 0.0, atol=1e-7)
    # those hours are served by solar alone, so they also emit nothing
    assert np.allclose(baseline.emissions[curtailing], 0.0, atol=1e-9)
    dark = baseline.gen[1] < 1e-9  # no solar: gas is marginal
    assert np.allclose(series.values[dark], 0.4, atol=1e-7)


def test_subrange_equals_slice_of_full(toy3):
    baseline = dispatch.run_year(toy3)
    full = mef.incremental_mef(toy3, baseline)
    part = mef.incremental_mef(toy3, baseline, hours=range(20, 40))
    assert np.array_equal(part.values, full.values[20:40])
    assert part.start == toy3.start + __import__("datetime").timedelta(hours=20)


def test_parallel_partition_is_order_independent(toy3):
    baseline = dispatch.run_year(toy3)
    seq = mef.incremental_mef(toy3, baseline, jobs=1)
    par = mef.incremental_mef(toy3, baseline, jobs=2)
    assert np.array_equal(seq.values, par.values)


def test_strict_mode_equals_fast_on_inert_storage(toy3):
    baseline = dispatch.run_year(toy3)
    fast = mef.incremental_mef(toy3, baseline, strict=False)
    strict = mef.incremental_mef(toy3, baseline, strict=True)
    assert np.array_equal(fast.values, strict.values)


def two_day_valley_scenario():
    demand = np.tile(np.concatenate([np.full(12, 20.0), np.full(12, 70.0)]), 2)
    return Scenario(
        name="valley2", start=START, hours=48, nodes=["DE"], years=[2030],
        clusters=[
            PlantCluster("base", "DE", "coal", installed_cap=50.0,
                         efficiency=0.4, carbon_content=0.3, cvar_full=10.0),
            PlantCluster("peak", "DE", "oil", installed_cap=40.0,
                         efficiency=0.35, carbon_content=0.28, cvar_full=100.0),
        ],
        storages=[StorageUnit("pump1", "DE", "mid_term", turbine_cap=11.0,
                              cycle_efficiency=0.8, energy_power_factor=9.0,
                              initial_level=0.0)],
        interconnectors=[],
        demand={"DE": TimeSeries(START, demand)},
    ).validate()


def test_downstream_rechain_stops_on_matching_state():
    scenario = two_day_valley_scenario()
    baseline = dispatch.run_year(scenario)
    windows = windows_for(scenario.hours)
    state = baseline.carried[1].copy()
    delta, chained = mef._downstream_delta(scenario, baseline, windows, 0, state)
    assert chained == 1
    assert delta == pytest.approx(0.0, abs=1e-7)


def test_strict_mode_matches_global_perturbed_rerun():
    # independent oracle: re-run the whole year with the perturbation and
    # chained states; the strict engine must reproduce that total delta
    scenario = two_day_valley_scenario()
    baseline = dispatch.run_year(scenario)
    strict = mef.incremental_mef(scenario, baseline, strict=True)
    for h in (3, 13, 18, 22, 30, 40):
        perturbed = dispatch.run_year(scenario, perturbation=(h, 1.0),
                                      keep_bases=False)
        global_delta = perturbed.emissions.sum() - baseline.emissions.sum()
        assert strict.values[h] == pytest.approx(max(global_delta, 0.0),
                                                 abs=1e-6), f"hour {h}"


def test_valley_hours_mef_is_base_rate():
    scenario = two_day_valley_scenario()
    baseline = dispatch.run_year(scenario)
    series = mef.incremental_mef(scenario, baseline)
    # valley hours: base cluster marginal at 0.3/0.4 t per MWh
    assert np.allclose(series.values[:12], 0.75, atol=1e-6)
    assert (series.values >= -1e-12).all()


def test_requires_bases():
    scenario = toy_de_3tech(3)
    baseline = dispatch.run_year(scenario, keep_bases=False)
    with pytest.raises(mef.MefError, match="keep_bases"):
        mef.incremental_mef(scenario, baseline)


def test_noncontiguous_hours_rejected(toy3):
    baseline = dispatch.run_year(toy3)
    with pytest.raises(mef.MefError, match="contiguous"):
        mef.incremental_mef(toy3, baseline, hours=[1, 5])
