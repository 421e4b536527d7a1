import io
import math
from datetime import date

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from signet.errors import ParseError, ValidationError
from signet.marketdata import (
    PricePanel, TradingCalendar, compute_returns, ingest_index, ingest_prices, write_prices_csv,
)


def csv_text(rows, header="symbol,date,close"):
    return io.StringIO(header + "\n" + "\n".join(rows) + "\n")


def test_complete_panel():
    panel = ingest_prices(csv_text([
        "A,2020-01-01,10", "A,2020-01-02,11", "A,2020-01-03,12",
        "B,2020-01-01,5", "B,2020-01-02,6", "B,2020-01-03,7",
    ]))
    assert panel.n_stocks == 2 and panel.n_days == 3
    assert panel.availability.all()
    assert panel.symbols == ("A", "B")


def test_union_calendar_with_holes():
    panel = ingest_prices(csv_text([
        "A,2020-01-01,10", "A,2020-01-02,11",
        "B,2020-01-02,6", "B,2020-01-03,7",
    ]))
    assert panel.n_days == 3
    assert panel.availability.tolist() == [[True, True, False], [False, True, True]]
    assert np.isnan(panel.prices[0, 2]) and np.isnan(panel.prices[1, 0])


def test_negative_close_names_row():
    with pytest.raises(ValidationError, match="row 3"):
        ingest_prices(csv_text(["A,2020-01-01,10", "A,2020-01-02,-5"]))


def test_malformed_row_is_parse_error():
    with pytest.raises(ParseError, match="row 2"):
        ingest_prices(csv_text(["A,2020-01-01"]))
    with pytest.raises(ParseError, match="row 2"):
        ingest_prices(csv_text(["A,01/02/2020,3"]))
    with pytest.raises(ParseError):
        ingest_prices(csv_text(["A,2020-01-01,3"], header="ticker,date,close"))


def test_duplicate_key_rejected():
    with pytest.raises(ValidationError, match="duplicate"):
        ingest_prices(csv_text(["A,2020-01-01,10", "A,2020-01-01,11"]))


def test_record_iterable_source():
    panel = ingest_prices([("X", date(2021, 5, 3), 1.5), ("X", date(2021, 5, 4), 1.6)])
    assert panel.symbols == ("X",) and panel.n_days == 2
    with pytest.raises(ValidationError):
        ingest_prices([("X", date(2021, 5, 3), 0.0)])


def test_returns_examples():
    cal = TradingCalendar((date(2020, 1, 1), date(2020, 1, 2), date(2020, 1, 3)))
    panel = PricePanel(cal, ("F", "U", "H"), np.array([
        [100.0, 100.0, 100.0],
        [100.0, 105.0, 105.0],
        [100.0, 101.0, np.nan],
    ]))
    ret = compute_returns(panel)
    assert ret.returns[0, 0] == 0.0
    assert ret.returns[1, 0] == pytest.approx(0.0487901641694320, abs=1e-15)
    assert ret.returns[1, 0] == math.log(105.0) - math.log(100.0)
    assert not ret.present[2, 1] and np.isnan(ret.returns[2, 1])
    assert ret.present[2, 0]


def test_calendar_must_increase():
    with pytest.raises(ValidationError):
        TradingCalendar((date(2020, 1, 2), date(2020, 1, 1)))
    with pytest.raises(ValidationError):
        TradingCalendar((date(2020, 1, 2), date(2020, 1, 2)))


def test_index_examples():
    one = ingest_index(io.StringIO("date,open,close\n2020-01-01,100,105\n"))
    assert len(one) == 1
    with pytest.raises(ValidationError, match="duplicate"):
        ingest_index(io.StringIO("date,open,close\n2020-01-01,100,105\n2020-01-01,100,106\n"))
    with pytest.raises(ValidationError):
        ingest_index(io.StringIO("date,open,close\n2020-01-01,100,0\n"))


@settings(max_examples=40, deadline=None)
@given(
    st.integers(1, 4),
    st.integers(2, 12),
    st.data(),
)
def test_round_trip_is_bit_exact(n_sym, n_days, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
    prices = np.exp(rng.normal(3, 2, (n_sym, n_days)))
    holes = rng.random((n_sym, n_days)) < 0.2
    holes[:, 0] = False  # every calendar day observed by someone
    prices[holes] = np.nan
    cal = TradingCalendar(tuple(date.fromordinal(730000 + 3 * t) for t in range(n_days)))
    panel = PricePanel(cal, tuple(f"S{i}" for i in range(n_sym)), prices)
    keep = panel.availability.any(axis=0)
    panel = PricePanel(TradingCalendar(tuple(d for d, k in zip(cal.days, keep) if k)), panel.symbols, prices[:, keep])
    buf = io.StringIO()
    write_prices_csv(panel, buf, header_comment="config_hash=x")
    buf.seek(0)
    again = ingest_prices(buf)
    assert again == panel
    assert np.array_equal(again.prices, panel.prices, equal_nan=True)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(1e-3, 1e6), min_size=2, max_size=60))
def test_returns_telescope(prices):
    cal = TradingCalendar(tuple(date.fromordinal(730000 + t) for t in range(len(prices))))
    ret = compute_returns(PricePanel(cal, ("A",), np.array([prices])))
    total = math.log(prices[-1]) - math.log(prices[0])
    assert abs(ret.returns.sum() - total) < 1e-10
