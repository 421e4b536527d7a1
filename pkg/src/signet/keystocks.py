"""Per-window strength rankings and the key-stock collections built from them.

Also bins network metrics against the index's per-window log return."""

from __future__ import annotations

import bisect
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from datetime import date
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, MissingIndexError
from .marketdata import IndexSeries, TradingCalendar
from .netbuild import SignedNetwork
from .windows import WindowSpec

logger = logging.getLogger(__name__)

DEFAULT_K = 10
DEFAULT_RETURN_BINS = 8


@dataclass(frozen=True)
class StrengthRanking:
    m: int
    kind: str
    entries: tuple[tuple[str, float], ...]
    # the k-th strength is shared with a node left out of the list
    tie_at_cutoff: bool = False

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(s for s, _ in self.entries)


@dataclass(frozen=True)
class KeyStockCollection:
    kind: str
    k: int
    symbols: tuple[str, ...]
    appearances: dict[str, int] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def distinct_count(self) -> int:
        return len(self.appearances)

    @property
    def max_appearances(self) -> int:
        return max(self.appearances.values(), default=0)

    def count_above(self, times: int = 10) -> int:
        return sum(1 for c in self.appearances.values() if c > times)


@dataclass(frozen=True)
class WindowReturn:
    m: int
    value: float | None
    open_date: date | None = None
    close_date: date | None = None
    substituted: bool = False
    reason: str | None = None


@dataclass(frozen=True)
class BinnedStat:
    low: float
    high: float
    mean: float
    sd: float
    count: int


def top_k(net: SignedNetwork, k: int = DEFAULT_K, m: int = 0) -> StrengthRanking:
    """Highest-strength nodes, ties broken by symbol."""
    order = sorted(range(net.n), key=lambda i: (-net.strengths[i], net.nodes[i]))
    chosen = order[:k]
    tie = len(order) > k and net.strengths[order[k]] == net.strengths[order[k - 1]]
    return StrengthRanking(
        m, net.kind, tuple((net.nodes[i], float(net.strengths[i])) for i in chosen), bool(tie)
    )


def ranking_overlap(a: StrengthRanking, b: StrengthRanking) -> int:
    if a.m != b.m:
        raise ValueError(f"rankings come from different windows ({a.m} vs {b.m})")
    return len(set(a.symbols) & set(b.symbols))


def build_collection(rankings: Sequence[StrengthRanking], k: int = DEFAULT_K) -> KeyStockCollection:
    kinds = {r.kind for r in rankings}
    if len(kinds) > 1:
        raise ValueError(f"rankings mix network kinds: {sorted(kinds)}")
    symbols = tuple(s for r in sorted(rankings, key=lambda r: r.m) for s in r.symbols)
    counts = Counter(symbols)
    return KeyStockCollection(
        kind=kinds.pop() if kinds else "",
        k=k,
        symbols=symbols,
        appearances=dict(sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))),
    )


def window_return(index: IndexSeries, window: WindowSpec, calendar: TradingCalendar) -> WindowReturn:
    """``ln C - ln O``: index open on the window's first day, close on its last.

    If the index lacks either boundary day the nearest index day inside the
    window is used and the substitution flagged.
    """
    first, last = calendar.day(window.start_day), calendar.day(window.end_day)
    dates = index.dates
    lo = bisect.bisect_left(dates, first)
    hi = bisect.bisect_right(dates, last) - 1
    if lo > hi:
        return WindowReturn(window.m, None, reason=f"no index data between {first} and {last}")
    o_date, c_date = dates[lo], dates[hi]
    substituted = o_date != first or c_date != last
    if substituted:
        logger.info("window %d: index boundary %s..%s substituted by %s..%s", window.m, first, last, o_date, c_date)
    value = math.log(index.close[hi]) - math.log(index.open[lo])
    return WindowReturn(window.m, value, o_date, c_date, substituted)


def window_return_strict(index: IndexSeries, window: WindowSpec, calendar: TradingCalendar) -> WindowReturn:
    wr = window_return(index, window, calendar)
    if wr.value is None:
        raise MissingIndexError(wr.reason)
    return wr


def equal_width_edges(values: Iterable[float], n_bins: int = DEFAULT_RETURN_BINS) -> np.ndarray:
    x = np.asarray([v for v in values if v is not None], dtype=np.float64)
    if x.size == 0:
        raise ConfigError("no defined returns to bin")
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    return np.linspace(lo, hi, n_bins + 1)


def bin_metric_by_return(points: Iterable[tuple[float | None, float | None]], bin_edges) -> tuple[list[BinnedStat], int]:
    """Mean and population sd of a metric per return bin ``[e_b, e_{b+1})``, last bin closed.

    Points whose metric is undefined (None) are skipped; their count is
    returned alongside the bins. Points with undefined return are ignored.
    """
    edges = np.asarray(bin_edges, dtype=np.float64)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ConfigError("bin edges must be strictly increasing with at least two entries")
    buckets: list[list[float]] = [[] for _ in range(edges.size - 1)]
    n_undefined = 0
    for ret, val in points:
        if ret is None:
            continue
        if val is None:
            n_undefined += 1
            continue
        if ret < edges[0] or ret > edges[-1]:
            raise ConfigError(f"return {ret!r} outside bin edges [{edges[0]!r}, {edges[-1]!r}]")
        b = min(int(np.searchsorted(edges, ret, side="right")) - 1, edges.size - 2)
        buckets[b].append(val)
    out = []
    for b, vals in enumerate(buckets):
        if vals:
            v = np.asarray(vals)
            out.append(BinnedStat(float(edges[b]), float(edges[b + 1]), float(v.mean()), float(v.std()), v.size))
    return out, n_undefined
