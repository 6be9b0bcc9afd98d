import datetime as dt
import logging

import numpy as np
import pytest

from mefkit import charging
from mefkit.model import MefSeries
from oracles import best_charge_subset

MIDNIGHT = dt.datetime(2030, 1, 1)


def mef_series(values, start=MIDNIGHT):
    return MefSeries(start, np.asarray(values, float), source="incremental")


def test_constant_night_no_savings():
    values = np.zeros(48)
    values[20:30] = 1.0
    values[44:] = 1.0
    plan = charging.plan_charging(mef_series(values))
    assert plan.days == 1  # second night is partial (only 4 of 10 hours)
    assert plan.e1_daily[0] == pytest.approx(4.0)
    assert plan.e2_daily[0] == pytest.approx(4.0)
    assert plan.savings == pytest.approx(0.0)


def test_descending_night_hand_values():
    values = np.zeros(48)
    values[20:30] = [10, 9, 8, 7, 6, 5, 4, 3, 2, 1]
    plan = charging.plan_charging(mef_series(values))
    assert plan.e1_daily[0] == pytest.approx(34.0)  # 10+9+8+7
    assert plan.e2_daily[0] == pytest.approx(10.0)  # 4+3+2+1
    assert plan.savings == pytest.approx(24.0)
    best, _ = best_charge_subset(values[20:30], 4)
    assert plan.e2_daily[0] == pytest.approx(best)


def test_ties_break_to_earliest_hour():
    values = np.zeros(72)
    values[20:30] = [1, 1, 1, 1, 1, 1, 1, 1, 1, 1]
    plan = charging.plan_charging(mef_series(values[:48]))
    np.testing.assert_array_equal(plan.selected_hours[0], [20, 21, 22, 23])


def test_random_nights_match_exhaustive_oracle():
    rng = np.random.default_rng(71)
    days = 50
    values = rng.uniform(0.0, 1.0, size=days * 24 + 10)
    plan = charging.plan_charging(mef_series(values))
    assert plan.days == days
    for d in range(days):
        night = values[20 + 24 * d:30 + 24 * d]
        best, _ = best_charge_subset(night, 4)
        assert plan.e2_daily[d] == pytest.approx(best, abs=1e-12), f"day {d}"
        assert plan.e1_daily[d] == pytest.approx(night[:4].sum(), abs=1e-12)


def test_additive_shift_invariance():
    rng = np.random.default_rng(73)
    values = rng.uniform(0.0, 1.0, size=3 * 24 + 8)
    base = charging.plan_charging(mef_series(values))
    shifted = charging.plan_charging(mef_series(values + 5.0))
    np.testing.assert_array_equal(base.selected_hours, shifted.selected_hours)
    np.testing.assert_allclose(shifted.e1_daily, base.e1_daily + 4 * 5.0)
    np.testing.assert_allclose(shifted.e2_daily, base.e2_daily + 4 * 5.0)


def test_partial_final_night_dropped(caplog):
    values = np.ones(24 + 25)  # second window would need hours 44..53
    with caplog.at_level(logging.WARNING, logger="mefkit.charging"):
        plan = charging.plan_charging(mef_series(values))
    assert plan.days == 1
    assert plan.dropped_hours == 49 - 44
    assert any("partial final night" in r.message for r in caplog.records)


def test_window_shorter_than_hours_rejected():
    with pytest.raises(ValueError, match="shorter"):
        charging.plan_charging(mef_series(np.ones(48)), window=3, charge_hours=4)


def test_non_midnight_series_alignment():
    start = MIDNIGHT + dt.timedelta(hours=18)
    values = np.zeros(40)
    values[2:12] = [5, 1, 1, 1, 1, 5, 5, 5, 5, 5]  # window starts at 20:00
    plan = charging.plan_charging(mef_series(values, start=start))
    assert plan.first_night_offset == 2
    assert plan.e2_daily[0] == pytest.approx(1 + 1 + 1 + 1)
    np.testing.assert_array_equal(plan.selected_hours[0], [3, 4, 5, 6])


def test_selected_mask_sums_to_charge_hours():
    rng = np.random.default_rng(79)
    plan = charging.plan_charging(mef_series(rng.uniform(size=5 * 24 + 10)))
    mask = plan.selected_mask()
    assert mask.shape == (5, 10)
    np.testing.assert_array_equal(mask.sum(axis=1), 4)
    # optimized never exceeds baseline
    assert (plan.e2_daily <= plan.e1_daily + 1e-12).all()


def test_savings_summary_reference_rows():
    # published cumulative totals for the five study years
    rows = [
        (2019, 868.96, 561.02),
        (2020, 757.49, 577.44),
        (2025, 650.13, 466.58),
        (2030, 338.94, 212.51),
        (2040, 327.36, 207.23),
    ]
    summary = charging.savings_summary(rows)
    np.testing.assert_allclose(summary.savings,
                               [307.94, 180.05, 183.55, 126.43, 120.13],
                               atol=0.02)
    assert summary.per_year_pct[0] == pytest.approx(35.4, abs=0.5)
    assert summary.per_year_pct[4] == pytest.approx(36.7, abs=0.5)
    # the headline figure: average saving relative to average baseline
    assert abs(summary.average_pct - 31.0) < 1.0


def test_savings_summary_zero():
    plan = charging.plan_charging(mef_series(np.ones(34)))
    summary = charging.savings_summary(plan)
    assert summary.average_pct == pytest.approx(0.0)


def test_savings_summary_mass_columns():
    rows = [(2030, 100.0, 60.0)]
    summary = charging.savings_summary(rows, energy_per_hour_kwh=11.0)
    row = summary.rows()[0]
    assert row["savings_mass_kg"] == pytest.approx(40.0 * 11.0)
    assert row["e1_mass_kg"] == pytest.approx(1100.0)
