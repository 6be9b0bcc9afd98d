"""Deterministic desk-scale scenarios used by the tests, docs and CLI demos.

``toy_de_3tech`` is the bundled reference fixture: one node, three
conventional clusters with distinct variable costs and emission rates, and a
deliberately inert pumped-storage unit (cycle efficiency far below any price
spread, starting empty), so the hourly optimum is a pure merit order that can
be checked by hand.  Demand is shaped to keep a safety margin around the
points where the marginal cluster changes, so each hour has a unique marginal
unit even after a +1 MWh perturbation.
"""
from __future__ import annotations

import datetime as dt

import numpy as np

from .model import PlantCluster, Scenario, StorageUnit, TimeSeries

START = dt.datetime(2030, 1, 1)

#: cumulative-capacity breakpoints of the 3-tech merit order
_KINKS = (40.0, 70.0)
_MARGIN = 1.3


def _shaped_demand(hours: int, rng_seed: int = 0) -> np.ndarray:
    t = np.arange(hours)
    hour_of_day = t % 24
    day = t // 24
    base = 55.0 + 26.0 * np.sin(2.0 * np.pi * (hour_of_day - 6.0) / 24.0)
    base *= 1.0 + 0.06 * np.sin(2.0 * np.pi * day / 7.3)
    jitter = np.random.default_rng(rng_seed).uniform(-1.5, 1.5, size=hours)
    demand = base + jitter
    for kink in _KINKS:
        near = np.abs(demand - kink) < _MARGIN
        demand[near] = kink + np.where(demand[near] >= kink, _MARGIN, -_MARGIN)
    return np.clip(demand, 5.0, 95.0)


def toy_de_3tech(days: int = 3) -> Scenario:
    hours = 24 * days
    demand = _shaped_demand(hours)
    clusters = [
        PlantCluster("nuke1", "DE", "nuclear", installed_cap=40.0,
                     efficiency=0.33, carbon_content=0.0, cvar_full=5.0),
        PlantCluster("coal1", "DE", "coal", installed_cap=30.0,
                     efficiency=0.40, carbon_content=0.34, cvar_full=25.0),
        PlantCluster("gas1", "DE", "gas", installed_cap=30.0,
                     efficiency=0.50, carbon_content=0.20, cvar_full=40.0),
    ]
    # lossy enough that charging never pays off at these prices, and empty,
    # so it stays idle and the merit order stays analytic
    storage = StorageUnit("ps1", "DE", "mid_term", turbine_cap=5.0,
                          cycle_efficiency=0.10, energy_power_factor=9.0,
                          initial_level=0.0)
    return Scenario(
        name="toy_de_3tech",
        start=START,
        hours=hours,
        nodes=["DE"],
        years=[2030],
        clusters=clusters,
        storages=[storage],
        interconnectors=[],
        demand={"DE": TimeSeries(START, demand)},
    ).validate()


def toy_merit_order() -> dict:
    """Hand facts about toy_de_3tech for the oracles: caps, cvars, rates."""
    return {
        "caps": np.array([40.0, 30.0, 30.0]),
        "cvars": np.array([5.0, 25.0, 40.0]),
        "rates": np.array([0.0, 0.34 / 0.40, 0.20 / 0.50]),
    }


def toy_storage_valley() -> Scenario:
    """One day, flat valley then flat peak; arbitrage is strongly profitable."""
    demand = np.concatenate([np.full(12, 20.0), np.full(12, 70.0)])
    clusters = [
        PlantCluster("base", "DE", "coal", installed_cap=50.0,
                     efficiency=0.4, carbon_content=0.3, cvar_full=10.0),
        PlantCluster("peak", "DE", "oil", installed_cap=40.0,
                     efficiency=0.35, carbon_content=0.28, cvar_full=100.0),
    ]
    storage = StorageUnit("pump1", "DE", "mid_term", turbine_cap=11.0,
                          cycle_efficiency=0.8, energy_power_factor=9.0,
                          initial_level=0.0)
    return Scenario(
        name="toy_storage_valley",
        start=START,
        hours=24,
        nodes=["DE"],
        years=[2030],
        clusters=clusters,
        storages=[storage],
        interconnectors=[],
        demand={"DE": TimeSeries(START, demand)},
    ).validate()


def toy_with_res(days: int = 2) -> Scenario:
    """Gas system with midday solar surplus: curtailment hours have MEF 0."""
    hours = 24 * days
    t = np.arange(hours)
    hod = t % 24
    solar = np.clip(np.sin(np.pi * (hod - 6) / 12.0), 0.0, None)
    demand = np.full(hours, 30.0)
    clusters = [
        PlantCluster("gas1", "DE", "gas", installed_cap=50.0,
                     efficiency=0.5, carbon_content=0.2, cvar_full=40.0),
        PlantCluster("sol1", "DE", "solar", installed_cap=60.0,
                     availability=TimeSeries(START, solar)),
    ]
    return Scenario(
        name="toy_with_res",
        start=START,
        hours=hours,
        nodes=["DE"],
        years=[2030],
        clusters=clusters,
        storages=[],
        interconnectors=[],
        demand={"DE": TimeSeries(START, demand)},
    ).validate()


def toy_committed(days: int = 2) -> Scenario:
    """Single cluster with a real commitment layer (min load, ramp cost)."""
    hours = 24 * days
    demand = _shaped_demand(hours) * 0.5 + 10.0
    clusters = [
        PlantCluster("chp1", "DE", "gas", installed_cap=80.0,
                     efficiency=0.5, carbon_content=0.2, cvar_full=30.0,
                     cvar_min=36.0, min_load=0.3, cramp=12.0),
    ]
    return Scenario(
        name="toy_committed",
        start=START,
        hours=hours,
        nodes=["DE"],
        years=[2030],
        clusters=clusters,
        storages=[],
        interconnectors=[],
        demand={"DE": TimeSeries(START, demand)},
    ).validate()


def toy_regime_rich(days: int = 45, seed: int = 0) -> Scenario:
    """Three-tech system with storm-driven wind and mix noise in the top regime.

    Wind swings between calm and near-full feed-in with a mean dwell around 14
    hours, pushing the residual load across the whole merit order at irregular
    times.  Coal availability wobbles hour to hour; that only moves the
    coal/gas mix when coal is capacity-bound, so the emission noise is much
    larger in the high-MEF regime than in the low one.  The result is a year
    with frequent, abrupt regime switches and strongly regime-dependent
    variance, which is where regime-switching estimation earns its keep.
    """
    hours = 24 * days
    rng = np.random.default_rng(seed)
    t = np.arange(hours)
    demand = 58.0 + 20.0 * np.sin(2.0 * np.pi * ((t % 24) - 6.0) / 24.0)
    demand = demand + rng.uniform(-2.5, 2.5, hours)
    storm = np.empty(hours, dtype=bool)
    storm[0] = False
    flips = rng.random(hours) < 1.0 / 14.0
    for i in range(1, hours):
        storm[i] = storm[i - 1] ^ flips[i]
    wind_af = np.clip(np.where(storm, 0.88, 0.06)
                      + rng.uniform(-0.05, 0.05, hours), 0.0, 1.0)
    coal_af = 1.0 - rng.uniform(0.0, 0.25, hours)
    clusters = [
        PlantCluster("nuke1", "DE", "nuclear", installed_cap=40.0,
                     efficiency=0.33, cvar_full=5.0),
        PlantCluster("coal1", "DE", "coal", installed_cap=30.0,
                     efficiency=0.40, carbon_content=0.34, cvar_full=25.0,
                     availability=TimeSeries(START, coal_af)),
        PlantCluster("gas1", "DE", "gas", installed_cap=30.0,
                     efficiency=0.50, carbon_content=0.20, cvar_full=40.0),
        PlantCluster("wind1", "DE", "onshore", installed_cap=42.0,
                     availability=TimeSeries(START, wind_af)),
    ]
    return Scenario(
        name="toy_regime_rich",
        start=START,
        hours=hours,
        nodes=["DE"],
        years=[2030],
        clusters=clusters,
        storages=[],
        interconnectors=[],
        demand={"DE": TimeSeries(START, demand)},
    ).validate()


def toy_two_nodes(days: int = 1) -> Scenario:
    """Cheap node exporting to an expensive one over a lossy link."""
    hours = 24 * days
    clusters = [
        PlantCluster("cheap", "A", "nuclear", installed_cap=100.0,
                     efficiency=0.33, cvar_full=5.0),
        PlantCluster("dear", "B", "gas", installed_cap=100.0,
                     efficiency=0.5, carbon_content=0.2, cvar_full=60.0),
    ]
    return Scenario(
        name="toy_two_nodes",
        start=START,
        hours=hours,
        nodes=["A", "B"],
        years=[2030],
        clusters=clusters,
        storages=[],
        interconnectors=[("A", "B", 25.0)],
        demand={
            "A": TimeSeries(START, np.full(hours, 40.0)),
            "B": TimeSeries(START, np.full(hours, 50.0)),
        },
        grid_loss=0.04,
    ).validate()
