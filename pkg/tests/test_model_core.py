import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mefkit import scenario_io
from mefkit.model import MefSeries, ScenarioError, TimeSeries
from mefkit.toys import toy_de_3tech

MINIMAL_CFG = """\
[scenario]
name = mini
start = 2030-01-01T00:00:00
hours = 24

[node DE]
demand = demand.csv

[cluster p1]
node = DE
tech = gas
installed_cap = 100
efficiency = 0.5
cvar_full = 30
"""


def write_minimal(tmp_path, cfg=MINIMAL_CFG, demand=None):
    (tmp_path / "scenario.cfg").write_text(cfg)
    series = TimeSeries(dt.datetime(2030, 1, 1), demand if demand is not None
                        else np.full(24, 50.0))
    scenario_io.write_series_csv(series, tmp_path / "demand.csv")
    return tmp_path


def test_minimal_scenario_loads(tmp_path):
    scenario = scenario_io.load_scenario(write_minimal(tmp_path))
    assert len(scenario.clusters) == 1
    assert scenario.hours == 24
    assert scenario.clusters[0].cvar_min == 30.0
    assert scenario.mef_node == "DE"


def test_missing_file_reported(tmp_path):
    with pytest.raises(FileNotFoundError):
        scenario_io.load_scenario(tmp_path / "nowhere")


def test_unknown_key_rejected(tmp_path):
    cfg = MINIMAL_CFG + "frobnicate = 3\n"
    write_minimal(tmp_path, cfg)
    with pytest.raises(ScenarioError, match="unknown key"):
        scenario_io.load_scenario(tmp_path)


def test_availability_out_of_range_reports_hour(tmp_path):
    write_minimal(tmp_path, MINIMAL_CFG + "availability = avail.csv\n")
    av = np.ones(24)
    av[7] = 1.3
    scenario_io.write_series_csv(TimeSeries(dt.datetime(2030, 1, 1), av),
                                 tmp_path / "avail.csv")
    with pytest.raises(ScenarioError, match=r"availability out of \[0,1\] at hour 7"):
        scenario_io.load_scenario(tmp_path)


def test_undeclared_interconnector_endpoint(tmp_path):
    cfg = MINIMAL_CFG + "\n[link DE FR]\ncapacity = 100\n"
    write_minimal(tmp_path, cfg)
    with pytest.raises(ScenarioError, match="undeclared endpoint"):
        scenario_io.load_scenario(tmp_path)


def test_hours_must_be_multiple_of_24(tmp_path):
    cfg = MINIMAL_CFG.replace("hours = 24", "hours = 25")
    (tmp_path / "scenario.cfg").write_text(cfg)
    series = TimeSeries(dt.datetime(2030, 1, 1), np.full(25, 50.0))
    scenario_io.write_series_csv(series, tmp_path / "demand.csv")
    with pytest.raises(ScenarioError, match="multiple of 24"):
        scenario_io.load_scenario(tmp_path)


def test_nan_forbidden():
    with pytest.raises(ValueError, match="non-finite value at hour 2"):
        TimeSeries(dt.datetime(2030, 1, 1), [1.0, 2.0, float("nan")])


def test_cost_derivation_from_fuel_and_co2(tmp_path):
    cfg = """\
[scenario]
name = priced
start = 2030-01-01T00:00:00
hours = 24
years = 2030

[node DE]
demand = demand.csv

[cluster p1]
node = DE
tech = gas
installed_cap = 100
efficiency = 0.5
carbon_content = 0.2

[fuel_price gas]
2030 = 25

[co2_price]
2030 = 80
"""
    write_minimal(tmp_path, cfg)
    scenario = scenario_io.load_scenario(tmp_path)
    # (fuel + co2 * carbon) / efficiency
    assert scenario.clusters[0].cvar_full == pytest.approx((25 + 80 * 0.2) / 0.5)


def test_toy_fixture_total_capacity():
    scenario = toy_de_3tech(3)
    # hand sum of the three cluster capacities in the fixture
    assert scenario.total_installed_capacity() == pytest.approx(40.0 + 30.0 + 30.0)
    assert scenario.hours == 72
    assert len(scenario.storages) == 1


def test_bundled_fixture_matches_builder(toy_scenario_dir):
    loaded = scenario_io.load_scenario(toy_scenario_dir)
    built = toy_de_3tech(3)
    assert loaded.name == built.name
    assert loaded.hours == built.hours
    assert loaded.demand["DE"] == built.demand["DE"]
    assert [c.id for c in loaded.clusters] == [c.id for c in built.clusters]
    for a, b in zip(loaded.clusters, built.clusters):
        assert a.cvar_full == b.cvar_full
        assert a.installed_cap == b.installed_cap
        assert a.availability == b.availability


def test_scenario_round_trip(tmp_path):
    scenario = toy_de_3tech(3)
    scenario_io.write_scenario(scenario, tmp_path / "roundtrip")
    again = scenario_io.load_scenario(tmp_path / "roundtrip")
    assert again.name == scenario.name
    assert again.demand["DE"] == scenario.demand["DE"]
    assert again.load_shed_cost == scenario.load_shed_cost
    for a, b in zip(again.clusters, scenario.clusters):
        assert (a.id, a.node, a.tech) == (b.id, b.node, b.tech)
        assert a.availability == b.availability
        assert a.outages == b.outages
        assert (a.cvar_full, a.cvar_min, a.cramp) == (b.cvar_full, b.cvar_min, b.cramp)
    for a, b in zip(again.storages, scenario.storages):
        assert (a.id, a.kind, a.turbine_cap, a.initial_level) == \
            (b.id, b.kind, b.turbine_cap, b.initial_level)


def test_series_csv_zero_rows_format(tmp_path):
    series = TimeSeries(dt.datetime(2030, 1, 1), np.zeros(3))
    scenario_io.write_series_csv(series, tmp_path / "z.csv")
    lines = (tmp_path / "z.csv").read_text().strip().split("\n")
    assert lines[0] == "timestamp,value"
    assert len(lines) == 4
    assert all(ln.endswith(",0") for ln in lines[1:])


def test_mef_csv_round_trip_with_source(tmp_path):
    mef = MefSeries(dt.datetime(2030, 1, 1), np.array([0.4, 0.0, 0.85]),
                    source="incremental")
    scenario_io.write_series_csv(mef, tmp_path / "mef.csv")
    text = (tmp_path / "mef.csv").read_text()
    assert text.splitlines()[0] == "timestamp,value,source"
    assert text.count("incremental") == 3
    again = scenario_io.read_mef_csv(tmp_path / "mef.csv")
    assert again == mef


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(min_value=-1e12, max_value=1e12,
                          allow_nan=False, allow_infinity=False),
                min_size=1, max_size=50))
def test_series_round_trip_bit_exact(tmp_path_factory, values):
    tmp = tmp_path_factory.mktemp("series")
    series = TimeSeries(dt.datetime(2021, 6, 1, 12), np.array(values))
    scenario_io.write_series_csv(series, tmp / "s.csv")
    again, source = scenario_io.read_series_csv(tmp / "s.csv")
    assert source is None
    assert again.start == series.start
    assert np.array_equal(again.values, series.values)
