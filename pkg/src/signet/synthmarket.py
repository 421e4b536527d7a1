"""Synthetic one-factor price panels with planted sign structure.

Returns follow ``r_i(t) = loading_i * f(t) + eps_i(t)`` with loadings in
{+1, -1, 0}; prices start at 100 on day 1. Everything is a deterministic
function of the FactorModelSpec seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date

import numpy as np

from .marketdata import IndexSeries, PricePanel, TradingCalendar

START_PRICE = 100.0
START_INDEX = 1000.0


@dataclass(frozen=True)
class FactorModelSpec:
    n_stocks: int
    n_days: int
    loadings: tuple[int, ...]
    factor_vol: float = 0.02
    idio_vol: float = 0.004
    seed: int = 0
    innovations: str = "gaussian"
    dof: float = 4.0
    start_date: date = date(2000, 1, 3)

    def __post_init__(self):
        if len(self.loadings) != self.n_stocks:
            raise ValueError(f"{len(self.loadings)} loadings for {self.n_stocks} stocks")
        if any(l not in (-1, 0, 1) for l in self.loadings):
            raise ValueError("loadings must be +1, -1 or 0")
        if not (self.factor_vol > 0 and self.idio_vol > 0):
            raise ValueError("volatilities must be positive")
        if self.n_days < 2:
            raise ValueError("need at least 2 days")
        if self.innovations not in ("gaussian", "student_t"):
            raise ValueError(f"unknown innovations {self.innovations!r}")
        if self.innovations == "student_t" and not self.dof > 2:
            raise ValueError("student_t innovations need dof > 2")

    @property
    def groups(self) -> np.ndarray:
        return np.asarray(self.loadings, dtype=np.int8)


def two_group_spec(n_stocks: int, n_days: int, noise_ratio: float = 0.2, seed: int = 0,
                   factor_vol: float = 0.02, **kw) -> FactorModelSpec:
    """Half the roster loads +1 on the factor, half -1."""
    half = n_stocks // 2
    loadings = (1,) * half + (-1,) * (n_stocks - half)
    return FactorModelSpec(n_stocks, n_days, loadings, factor_vol, noise_ratio * factor_vol, seed, **kw)


def business_days(start: date, n: int) -> tuple[date, ...]:
    days = np.busday_offset(np.datetime64(start, "D"), np.arange(n), roll="forward")
    return tuple(d.item() for d in days)


def symbols_for(n: int) -> tuple[str, ...]:
    width = max(4, len(str(n)))
    return tuple(f"S{i:0{width}d}" for i in range(1, n + 1))


def _draws(rng: np.random.Generator, spec: FactorModelSpec, shape) -> np.ndarray:
    if spec.innovations == "gaussian":
        return rng.standard_normal(shape)
    return rng.standard_t(spec.dof, shape) / np.sqrt(spec.dof / (spec.dof - 2.0))


def simulate(spec: FactorModelSpec) -> tuple[np.ndarray, np.ndarray]:
    """Factor series ``f`` (length T-1) and stock returns (N x T-1)."""
    rng = np.random.default_rng(spec.seed)
    T1 = spec.n_days - 1
    f = spec.factor_vol * _draws(rng, spec, T1)
    eps = spec.idio_vol * _draws(rng, spec, (spec.n_stocks, T1))
    return f, spec.groups[:, None] * f[None, :] + eps


def _prices_from_returns(r: np.ndarray) -> np.ndarray:
    logp = np.zeros((r.shape[0], r.shape[1] + 1))
    np.cumsum(r, axis=1, out=logp[:, 1:])
    return START_PRICE * np.exp(logp)


def generate_panel(spec: FactorModelSpec) -> PricePanel:
    _, r = simulate(spec)
    calendar = TradingCalendar(business_days(spec.start_date, spec.n_days))
    return PricePanel(calendar, symbols_for(spec.n_stocks), _prices_from_returns(r))


def generate_index(spec: FactorModelSpec) -> IndexSeries:
    """Index tracking the common factor; each day opens at the previous close."""
    f, _ = simulate(spec)
    close = START_INDEX * np.exp(np.concatenate([[0.0], np.cumsum(f)]))
    open_ = np.concatenate([[START_INDEX], close[:-1]])
    return IndexSeries(business_days(spec.start_date, spec.n_days), open_, close)


def plant_crash(panel: PricePanel, crash_window: tuple[int, int], amplification: float,
                spec: FactorModelSpec) -> PricePanel:
    """Amplify and push down the factor's share of positive-loading stocks' returns
    on calendar days ``crash_window`` (1-based, inclusive).

    The factor is regenerated from ``spec``, so ``panel`` must come from
    :func:`generate_panel` with the same spec. Prices before the window are
    untouched; later prices shift by a constant factor per stock.
    """
    start, end = crash_window
    if not 1 <= start <= end <= panel.n_days:
        raise ValueError(f"crash window {crash_window} outside calendar of {panel.n_days} days")
    if amplification == 1:
        return panel
    f, _ = simulate(spec)
    # return on day t (t >= 2) is f[t - 2]
    days = np.arange(max(start, 2), end + 1)
    extra = np.zeros(panel.n_days)
    extra[days - 1] = (amplification - 1.0) * (f[days - 2] - spec.factor_vol)
    shift = np.exp(np.cumsum(extra))
    pos = spec.groups > 0
    prices = panel.prices.copy()
    prices[pos, start - 1:] *= shift[None, start - 1:]
    return PricePanel(panel.calendar, panel.symbols, prices)
