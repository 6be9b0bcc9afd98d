"""Accuracy metrics and comparison reports for hourly series.

MAE, MSE and RMSE are computed over the overlapping timestamps of the two
series only, with the dropped point count reported.  RMSE is the square root
of the reported MSE (identical accumulation), so RMSE**2 == MSE exactly.
"""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import HOUR, MefSeries, TimeSeries


@dataclass
class MetricReport:
    label_actual: str
    label_estimate: str
    mae: float
    mse: float
    rmse: float
    n_h: int
    dropped: int


def _as_series(obj):
    if isinstance(obj, (TimeSeries, MefSeries)):
        return obj.start, obj.values
    raise TypeError(f"expected a TimeSeries or MefSeries, got {type(obj)!r}")


def compare(actual, estimate, label_actual: str = "actual",
            label_estimate: str = "estimate") -> MetricReport:
    a_start, a = _as_series(actual)
    b_start, b = _as_series(estimate)
    lo = max(a_start, b_start)
    hi = min(a_start + a.size * HOUR, b_start + b.size * HOUR)
    n = int((hi - lo) / HOUR) if hi > lo else 0
    if n <= 0:
        raise ValueError("series have no overlapping hours")
    ai = int((lo - a_start) / HOUR)
    bi = int((lo - b_start) / HOUR)
    diff = a[ai:ai + n] - b[bi:bi + n]
    mae = float(np.abs(diff).mean())
    mse = float((diff * diff).mean())
    return MetricReport(
        label_actual=label_actual,
        label_estimate=label_estimate,
        mae=mae,
        mse=mse,
        rmse=float(np.sqrt(mse)),
        n_h=n,
        dropped=int((a.size - n) + (b.size - n)),
    )


def validate_prices(shadow, reference) -> MetricReport:
    """Shadow prices against a reference price series (same metrics)."""
    return compare(shadow, reference, label_actual="reference",
                   label_estimate="shadow_price")


METRIC_ROWS = ("mse", "mae", "rmse")


def report_table(reports: dict) -> list:
    """Rows (metric, {label: value}, average) for a metric x label grid.

    The average column is the unweighted mean of the per-label metrics.
    """
    labels = list(reports)
    rows = []
    for metric in METRIC_ROWS:
        values = {label: getattr(reports[label], metric) for label in labels}
        avg = float(np.mean([values[label] for label in labels]))
        rows.append((metric, values, avg))
    return rows


def write_report_csv(reports: dict, path) -> None:
    labels = list(reports)
    lines = ["metric," + ",".join(str(lb) for lb in labels) + ",average"]
    for metric, values, avg in report_table(reports):
        cells = [f"{values[lb]!r}" for lb in labels]
        lines.append(f"{metric}," + ",".join(cells) + f",{avg!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_plot_data(series_by_label: dict, path) -> None:
    """Long-format (hour, series, value) rows for external plotting."""
    lines = ["hour,series,value"]
    for label, series in series_by_label.items():
        start, values = _as_series(series)
        for i in range(values.size):
            stamp = (start + i * HOUR).isoformat()
            lines.append(f"{stamp},{label},{float(values[i])!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def load_plot_data(path) -> dict:
    """Inverse of :func:`write_plot_data`; returns {label: TimeSeries}."""
    lines = Path(path).read_text(encoding="utf-8").strip().split("\n")
    if lines[0] != "hour,series,value":
        raise ValueError("not a plot-data file")
    acc: dict = {}
    for ln in lines[1:]:
        stamp, label, value = ln.split(",")
        acc.setdefault(label, []).append((dt.datetime.fromisoformat(stamp),
                                          float(value)))
    out = {}
    for label, rows in acc.items():
        out[label] = TimeSeries(rows[0][0], np.array([v for _, v in rows]))
    return out


def emit_report(reports: dict, out_dir, plot_series: dict | None = None) -> list:
    """Write the metric table (and optional plot data); returns written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [out_dir / "metrics.csv"]
    write_report_csv(reports, written[0])
    if plot_series:
        path = out_dir / "plot_data.csv"
        write_plot_data(plot_series, path)
        written.append(path)
    return written
