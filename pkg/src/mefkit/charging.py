"""Emission-minimized overnight EV charging.

Each night offers a fixed window (default 20:00 to 06:00); the vehicle must
charge for a fixed number of hours (default 4).  The baseline strategy uses
the first hours of the window; the optimized strategy picks the hours with the
smallest MEF values, which solves the 0/1 selection problem exactly because
the objective is a plain sum (sort, take the cheapest, break ties on the
earlier hour).

Daily and cumulative figures are sums of MEF values over the chosen hours
(rates, not masses); multiply by an energy draw per charging hour (kWh) for
a mass reading in kg CO2-eq.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .model import MefSeries, TimeSeries

log = logging.getLogger("mefkit.charging")


@dataclass
class ChargingPlan:
    year: object
    night_start: int
    window: int
    charge_hours: int
    first_night_offset: int  # hours from series start to the first window
    baseline_hours: np.ndarray  # (days, charge_hours) indices into the series
    selected_hours: np.ndarray  # (days, charge_hours)
    e1_daily: np.ndarray
    e2_daily: np.ndarray
    dropped_hours: int

    @property
    def days(self) -> int:
        return int(self.e1_daily.size)

    @property
    def e1_total(self) -> float:
        return float(self.e1_daily.sum())

    @property
    def e2_total(self) -> float:
        return float(self.e2_daily.sum())

    @property
    def savings(self) -> float:
        return self.e1_total - self.e2_total

    def selected_mask(self) -> np.ndarray:
        """(days, window) 0/1 indicator of the optimized charging hours."""
        mask = np.zeros((self.days, self.window), dtype=int)
        base = self.first_night_offset + 24 * np.arange(self.days)[:, None]
        mask[np.arange(self.days)[:, None],
             self.selected_hours - base] = 1
        return mask


def plan_charging(mef: MefSeries | TimeSeries, night_start: int = 20,
                  window: int = 10, charge_hours: int = 4,
                  year=None) -> ChargingPlan:
    if charge_hours > window:
        raise ValueError("charging window shorter than the required hours")
    values = mef.values
    start_hour = mef.start.hour
    offset = (night_start - start_hour) % 24
    n = values.size

    base_rows, sel_rows, e1s, e2s = [], [], [], []
    pos = offset
    while pos + window <= n:
        seg = values[pos:pos + window]
        baseline = np.arange(pos, pos + charge_hours)
        order = np.lexsort((np.arange(window), seg))  # value, then earlier hour
        chosen = np.sort(order[:charge_hours]) + pos
        base_rows.append(baseline)
        sel_rows.append(chosen)
        e1s.append(float(values[baseline].sum()))
        e2s.append(float(values[chosen].sum()))
        pos += 24
    if not e1s:
        raise ValueError("series does not cover a single full charging window")
    dropped = n - pos if pos < n else 0
    if dropped:
        log.warning("dropping a partial final night of %d hours", dropped)

    return ChargingPlan(
        year=year if year is not None else getattr(mef, "year", None),
        night_start=night_start,
        window=window,
        charge_hours=charge_hours,
        first_night_offset=offset,
        baseline_hours=np.array(base_rows),
        selected_hours=np.array(sel_rows),
        e1_daily=np.array(e1s),
        e2_daily=np.array(e2s),
        dropped_hours=int(dropped),
    )


@dataclass
class SavingsSummary:
    years: list
    e1_totals: np.ndarray
    e2_totals: np.ndarray
    energy_per_hour_kwh: float | None = None

    @property
    def savings(self) -> np.ndarray:
        return self.e1_totals - self.e2_totals

    @property
    def per_year_pct(self) -> np.ndarray:
        return 100.0 * self.savings / self.e1_totals

    @property
    def average_pct(self) -> float:
        """Average saving as the ratio of average savings to average baseline
        (equivalently total over total)."""
        return float(100.0 * self.savings.mean() / self.e1_totals.mean())

    def rows(self) -> list:
        out = []
        for i, year in enumerate(self.years):
            row = {
                "year": year,
                "e1_total": float(self.e1_totals[i]),
                "e2_total": float(self.e2_totals[i]),
                "savings": float(self.savings[i]),
                "savings_pct": float(self.per_year_pct[i]),
            }
            if self.energy_per_hour_kwh is not None:
                row["e1_mass_kg"] = row["e1_total"] * self.energy_per_hour_kwh
                row["e2_mass_kg"] = row["e2_total"] * self.energy_per_hour_kwh
                row["savings_mass_kg"] = row["savings"] * self.energy_per_hour_kwh
            out.append(row)
        return out


def savings_summary(plans, energy_per_hour_kwh: float | None = None) -> SavingsSummary:
    """Summarize one or more yearly plans; also accepts raw (e1, e2) totals."""
    if isinstance(plans, ChargingPlan):
        plans = [plans]
    years, e1s, e2s = [], [], []
    for i, plan in enumerate(plans):
        if isinstance(plan, ChargingPlan):
            years.append(plan.year if plan.year is not None else i)
            e1s.append(plan.e1_total)
            e2s.append(plan.e2_total)
        else:  # (year, e1_total, e2_total) fixture rows
            year, e1, e2 = plan
            years.append(year)
            e1s.append(float(e1))
            e2s.append(float(e2))
    if not years:
        raise ValueError("no plans given")
    return SavingsSummary(years, np.array(e1s), np.array(e2s),
                          energy_per_hour_kwh)
