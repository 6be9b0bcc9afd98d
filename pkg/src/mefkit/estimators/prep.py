"""First-difference preparation for the statistical MEF estimators."""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np

from ..model import TimeSeries


@dataclass
class DiffPair:
    """Standardized hour-to-hour changes of emissions and generation.

    Standardization uses the full-series mean and population standard
    deviation of each differenced series; the raw moments are kept so fitted
    slopes can be mapped back to t CO2 per MWh.
    """

    d_emissions: np.ndarray
    d_generation: np.ndarray
    mean_de: float
    std_de: float
    mean_dg: float
    std_dg: float
    start: dt.datetime  # timestamp of the first differenced observation

    @property
    def n(self) -> int:
        return int(self.d_emissions.size)

    @property
    def slope_scale(self) -> float:
        """Multiplier taking a standardized slope back to raw units."""
        return self.std_de / self.std_dg


def prepare_series(emissions: TimeSeries, generation: TimeSeries) -> DiffPair:
    """Difference and standardize an (emissions, conventional generation) pair."""
    e = emissions.values
    g = generation.values
    if e.size != g.size:
        raise ValueError(f"length mismatch: {e.size} vs {g.size}")
    if e.size < 2:
        raise ValueError("need at least two hours to difference")
    de = np.diff(e)
    dg = np.diff(g)
    std_de = float(de.std())
    std_dg = float(dg.std())
    if std_de == 0.0 or std_dg == 0.0:
        raise ValueError("zero-variance series after differencing")
    mean_de = float(de.mean())
    mean_dg = float(dg.mean())
    return DiffPair(
        d_emissions=(de - mean_de) / std_de,
        d_generation=(dg - mean_dg) / std_dg,
        mean_de=mean_de,
        std_de=std_de,
        mean_dg=mean_dg,
        std_dg=std_dg,
        start=emissions.start + dt.timedelta(hours=1),
    )
