"""Stationarity and distribution diagnostics for hourly series."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..model import TimeSeries
from ._adf_quantiles import PROBS, QUANTILES


def unit_root_test(x, max_lag: int | None = None):
    """Augmented unit-root t-test with a constant, lag order chosen by AIC.

    Returns (statistic, p-value, used lag, critical values at 1/5/10%).
    The p-value interpolates a simulated null-distribution quantile table.
    """
    x = np.asarray(x, dtype=float)
    n_obs = x.size
    if n_obs < 30:
        raise ValueError("series too short for the unit-root test")
    if x.max() == x.min():
        raise ValueError("series is constant")
    if max_lag is None:
        max_lag = int(math.floor(12.0 * (n_obs / 100.0) ** 0.25))
        max_lag = min(max_lag, n_obs // 2 - 3)

    dx = np.diff(x)

    def regression(lag):
        rows = dx.size - max_lag  # common sample across lag orders
        rhs = [np.ones(rows), x[max_lag:-1]]
        for i in range(1, lag + 1):
            rhs.append(dx[max_lag - i:-i])
        X = np.column_stack(rhs)
        yv = dx[max_lag:]
        beta, *_ = np.linalg.lstsq(X, yv, rcond=None)
        resid = yv - X @ beta
        ssr = float(resid @ resid)
        k = X.shape[1]
        aic = rows * math.log(ssr / rows) + 2 * k
        sigma2 = ssr / (rows - k)
        cov = sigma2 * np.linalg.inv(X.T @ X)
        tstat = beta[1] / math.sqrt(cov[1, 1])
        return aic, float(tstat)

    best_lag, best_aic, best_t = 0, math.inf, 0.0
    for lag in range(0, max_lag + 1):
        aic, tstat = regression(lag)
        if aic < best_aic:
            best_lag, best_aic, best_t = lag, aic, tstat

    pvalue = float(np.interp(best_t, QUANTILES, PROBS,
                             left=PROBS[0] / 2, right=(1 + PROBS[-1]) / 2))
    crit = {p: float(np.interp(p, PROBS, QUANTILES)) for p in (0.01, 0.05, 0.10)}
    return best_t, pvalue, best_lag, crit


def normality_test(x):
    """Skewness/kurtosis-based normality statistic and its chi2(2) p-value."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 30:
        raise ValueError("series too short for the normality test")
    c = x - x.mean()
    m2 = float(np.mean(c ** 2))
    if m2 == 0.0:
        raise ValueError("series is constant")
    skew = float(np.mean(c ** 3)) / m2 ** 1.5
    kurt = float(np.mean(c ** 4)) / m2 ** 2
    stat = n / 6.0 * (skew ** 2 + (kurt - 3.0) ** 2 / 4.0)
    return stat, math.exp(-stat / 2.0)  # chi2 sf with 2 degrees of freedom


@dataclass
class DiagnosticsReport:
    label: str
    count: int
    mean: float
    std: float
    minimum: float
    q25: float
    q50: float
    q75: float
    maximum: float
    adf_stat: float
    adf_pvalue: float
    adf_lag: int
    jb_stat: float
    jb_pvalue: float

    ROWS = ("count", "mean", "std", "min", "25%", "50%", "75%", "max",
            "ADF statistic", "ADF p-value", "JB statistic", "JB p-value")

    def values_by_row(self) -> list:
        return [self.count, self.mean, self.std, self.minimum, self.q25,
                self.q50, self.q75, self.maximum, self.adf_stat,
                self.adf_pvalue, self.jb_stat, self.jb_pvalue]

    def to_text(self) -> str:
        lines = [f"{'':<16}{self.label:>14}"]
        for row, val in zip(self.ROWS, self.values_by_row()):
            if row == "count":
                lines.append(f"{row:<16}{val:>14d}")
            else:
                lines.append(f"{row:<16}{val:>14.3f}")
        return "\n".join(lines)


def diagnostics(series: TimeSeries | np.ndarray, label: str = "series",
                max_lag: int | None = None) -> DiagnosticsReport:
    x = series.values if isinstance(series, TimeSeries) else np.asarray(series, float)
    if x.size < 30:
        raise ValueError("series too short for diagnostics (need >= 30)")
    adf_stat, adf_p, lag, _ = unit_root_test(x, max_lag=max_lag)
    jb_stat, jb_p = normality_test(x)
    q25, q50, q75 = np.percentile(x, [25, 50, 75])
    return DiagnosticsReport(
        label=label,
        count=int(x.size),
        mean=float(x.mean()),
        std=float(x.std(ddof=1)),
        minimum=float(x.min()),
        q25=float(q25), q50=float(q50), q75=float(q75),
        maximum=float(x.max()),
        adf_stat=adf_stat, adf_pvalue=adf_p, adf_lag=lag,
        jb_stat=jb_stat, jb_pvalue=jb_p,
    )
