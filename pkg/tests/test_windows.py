from datetime import date

import numpy as np
import pytest
from hypothesis import given, strategies as st

from signet.errors import ConfigError, EmptyAnalysisError
from signet.marketdata import PricePanel, TradingCalendar
from signet.windows import WindowParams, eligible_stocks, enumerate_windows, window_count


def brute_windows(T, L, dt):
    out, m = [], 1
    while (m - 1) * dt + L <= T:
        out.append((1 + (m - 1) * dt, (m - 1) * dt + L))
        m += 1
    return out


def test_long_calendar_window_count():
    w = enumerate_windows(5816, WindowParams(26, 15))
    assert len(w) == 387
    assert w[-1] == (5791, 5816)
    assert (5816 - 26) % 15 == 0


def test_single_exact_fit():
    assert enumerate_windows(26, WindowParams(26, 15)) == [(1, 26)]


def test_partial_tail_not_windowed():
    assert enumerate_windows(40, WindowParams(26, 15)) == [(1, 26)]


def test_too_short_calendar():
    with pytest.raises(EmptyAnalysisError):
        enumerate_windows(25, WindowParams(26, 15))


@pytest.mark.parametrize("L,expected", [(24, 387), (26, 387), (28, 386)])
def test_length_sweep_counts(L, expected):
    assert len(enumerate_windows(5816, WindowParams(L, 15))) == expected


@given(st.integers(3, 400), st.integers(3, 60), st.integers(1, 40))
def test_matches_brute_enumeration(T, L, dt):
    if T < L:
        return
    got = enumerate_windows(T, WindowParams(L, dt))
    assert got == brute_windows(T, L, dt)
    assert len(got) == window_count(T, L, dt)
    assert all(e - s + 1 == L and e <= T for s, e in got)


@pytest.mark.parametrize("kw", [{"L": 2}, {"dt": 0}, {"theta": -0.1}, {"theta": 1.0}])
def test_param_validation(kw):
    with pytest.raises(ConfigError):
        WindowParams(**kw)


def _panel(mask):
    mask = np.asarray(mask, dtype=bool)
    prices = np.where(mask, 10.0, np.nan)
    cal = TradingCalendar(tuple(date.fromordinal(730000 + t) for t in range(mask.shape[1])))
    return PricePanel(cal, tuple(f"S{i}" for i in range(mask.shape[0])), prices)


def test_eligibility_rules():
    panel = _panel([
        [1, 1, 1, 1, 1, 1],  # full
        [1, 1, 0, 1, 1, 1],  # missing one in-window day
        [0, 1, 1, 1, 1, 0],  # missing only out-of-window days
    ])
    assert eligible_stocks(panel, (2, 5)) == (0, 2)


@given(st.lists(st.lists(st.booleans(), min_size=8, max_size=8), min_size=1, max_size=6), st.data())
def test_eligibility_monotone(mask, data):
    mask = np.array(mask)
    mask[:, 0] = True
    before = set(eligible_stocks(_panel(mask), (2, 7)))
    i = data.draw(st.integers(0, mask.shape[0] - 1))
    t = data.draw(st.integers(1, 6))
    mask[i, t] = False
    after = set(eligible_stocks(_panel(mask), (2, 7)))
    assert after <= before
