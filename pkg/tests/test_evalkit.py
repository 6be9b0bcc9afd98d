import datetime as dt

import numpy as np
import pytest

from mefkit import dispatch, evalkit
from mefkit.model import TimeSeries
from mefkit.toys import toy_de_3tech, toy_merit_order
from oracles import merit_order_price

START = dt.datetime(2030, 1, 1)


def ts(values, start=START):
    return TimeSeries(start, np.asarray(values, float))


def test_identical_series_zero_metrics():
    a = ts([1.0, 2.0, 3.0])
    report = evalkit.compare(a, a)
    assert report.mae == report.mse == report.rmse == 0.0
    assert report.n_h == 3
    assert report.dropped == 0


def test_hand_arithmetic():
    report = evalkit.compare(ts([1.0, 2.0, 3.0]), ts([2.0, 2.0, 2.0]))
    assert report.mae == pytest.approx(2.0 / 3.0)
    assert report.mse == pytest.approx(2.0 / 3.0)
    assert report.rmse == pytest.approx(np.sqrt(2.0 / 3.0))


def test_overlap_alignment_and_dropped_count():
    a = ts(np.arange(10.0))
    b = ts(np.arange(8.0) + 1.0, start=START + dt.timedelta(hours=2))
    # overlap: hours 2..9 of a vs 0..7 of b
    report = evalkit.compare(a, b)
    assert report.n_h == 8
    assert report.dropped == 2
    assert report.mae == pytest.approx(1.0)


def test_empty_overlap_rejected():
    a = ts([1.0, 2.0])
    b = ts([1.0, 2.0], start=START + dt.timedelta(hours=5))
    with pytest.raises(ValueError, match="overlap"):
        evalkit.compare(a, b)


def test_metric_identities_random_pairs():
    rng = np.random.default_rng(83)
    for _ in range(100):
        n = int(rng.integers(2, 200))
        a = rng.normal(size=n)
        b = rng.normal(size=n)
        r = evalkit.compare(ts(a), ts(b))
        assert r.rmse == np.sqrt(r.mse)  # identical accumulation, exact
        assert r.mae <= r.rmse + 1e-15

        perm = rng.permutation(n)
        rp = evalkit.compare(ts(a[perm]), ts(b[perm]))
        assert rp.mae == pytest.approx(r.mae, rel=1e-12)
        assert rp.mse == pytest.approx(r.mse, rel=1e-12)

        c = float(rng.uniform(0.5, 3.0))
        rc = evalkit.compare(ts(c * a), ts(c * b))
        assert rc.mae == pytest.approx(c * r.mae, rel=1e-12)
        assert rc.mse == pytest.approx(c * c * r.mse, rel=1e-12)
        assert rc.rmse == pytest.approx(c * r.rmse, rel=1e-12)


def test_validate_prices_zero_on_equal():
    a = ts([10.0, 20.0, 30.0])
    report = evalkit.validate_prices(a, a)
    assert report.mae == 0.0
    assert report.label_estimate == "shadow_price"


def test_toy_shadow_prices_match_merit_order():
    scenario = toy_de_3tech(3)
    out = dispatch.run_year(scenario)
    facts = toy_merit_order()
    demand = scenario.demand["DE"].values
    reference = ts([merit_order_price(facts["caps"], facts["cvars"], d)
                    for d in demand], start=scenario.start)
    report = evalkit.validate_prices(out.shadow_price_series(), reference)
    assert report.mae < 1e-6


def test_report_table_layout_and_average():
    reports = {
        2019: evalkit.compare(ts([1.0, 2.0]), ts([2.0, 2.0])),
        2020: evalkit.compare(ts([1.0, 3.0]), ts([1.0, 1.0])),
    }
    rows = evalkit.report_table(reports)
    assert [r[0] for r in rows] == ["mse", "mae", "rmse"]
    mse_row = rows[0]
    assert mse_row[1][2019] == pytest.approx(0.5)
    assert mse_row[1][2020] == pytest.approx(2.0)
    assert mse_row[2] == pytest.approx(1.25)  # unweighted mean


def test_emit_report_and_round_trip(tmp_path):
    reports = {"msdr": evalkit.compare(ts([1.0, 2.0]), ts([1.5, 2.5]))}
    series = {"bench": ts([0.1, 0.2, 0.3]), "msdr": ts([0.1, 0.25, 0.28])}
    written = evalkit.emit_report(reports, tmp_path, plot_series=series)
    assert (tmp_path / "metrics.csv").exists()
    text = (tmp_path / "metrics.csv").read_text()
    assert text.splitlines()[0] == "metric,msdr,average"
    again = evalkit.load_plot_data(tmp_path / "plot_data.csv")
    assert set(again) == {"bench", "msdr"}
    assert again["bench"] == series["bench"]
    assert len(written) == 2
