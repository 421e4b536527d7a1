"""Price and index ingestion, calendar alignment, log returns.

Prices live in an ``N_total x T`` float64 matrix with NaN marking an
availability hole; the boolean mask is kept alongside so callers never
have to test for NaN themselves.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import ParseError, ValidationError

logger = logging.getLogger(__name__)

PRICE_HEADER = ("symbol", "date", "close")
INDEX_HEADER = ("date", "open", "close")


@dataclass(frozen=True)
class PriceRecord:
    symbol: str
    date: date
    close: float


@dataclass(frozen=True)
class TradingCalendar:
    """Strictly increasing trading dates; day ``t`` (1-based) is ``days[t-1]``."""

    days: tuple[date, ...]

    def __post_init__(self):
        for a, b in zip(self.days, self.days[1:]):
            if not a < b:
                raise ValidationError(f"calendar not strictly increasing at {a} -> {b}")

    def __len__(self) -> int:
        return len(self.days)

    def day(self, t: int) -> date:
        """Calendar date of 1-based trading day ``t``."""
        return self.days[t - 1]


@dataclass(frozen=True, eq=False)
class PricePanel:
    calendar: TradingCalendar
    symbols: tuple[str, ...]
    prices: np.ndarray
    availability: np.ndarray = field(default=None)

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=np.float64)
        if prices.shape != (len(self.symbols), len(self.calendar)):
            raise ValidationError(
                f"price matrix shape {prices.shape} does not match "
                f"{len(self.symbols)} symbols x {len(self.calendar)} days"
            )
        mask = ~np.isnan(prices)
        if self.availability is not None and not np.array_equal(mask, self.availability):
            raise ValidationError("availability mask disagrees with present prices")
        if np.any(prices[mask] <= 0):
            raise ValidationError("non-positive price in panel")
        prices.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "availability", mask)

    @property
    def n_stocks(self) -> int:
        return len(self.symbols)

    @property
    def n_days(self) -> int:
        return len(self.calendar)

    def __eq__(self, other):
        if not isinstance(other, PricePanel):
            return NotImplemented
        return (
            self.calendar == other.calendar
            and self.symbols == other.symbols
            and np.array_equal(self.prices, other.prices, equal_nan=True)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ReturnPanel:
    """Log returns; column ``j`` holds the return on 1-based trading day ``j + 2``."""

    calendar: TradingCalendar
    symbols: tuple[str, ...]
    returns: np.ndarray
    present: np.ndarray

    @property
    def n_stocks(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class IndexSeries:
    dates: tuple[date, ...]
    open: np.ndarray
    close: np.ndarray

    def __post_init__(self):
        if len(set(self.dates)) != len(self.dates):
            raise ValidationError("duplicate date in index series")
        if np.any(np.asarray(self.open) <= 0) or np.any(np.asarray(self.close) <= 0):
            raise ValidationError("non-positive index level")

    def __len__(self) -> int:
        return len(self.dates)

    def lookup(self) -> dict[date, tuple[float, float]]:
        return {d: (float(o), float(c)) for d, o, c in zip(self.dates, self.open, self.close)}


def _open_text(source) -> tuple[Iterable[str], bool]:
    if isinstance(source, (str, Path)):
        return open(source, newline="", encoding="utf-8"), True
    return source, False


def _parse_date(text: str, row: int) -> date:
    try:
        return date.fromisoformat(text.strip())
    except ValueError as exc:
        raise ParseError(f"bad date {text!r}", row=row) from exc


def _parse_positive(text: str, name: str, row: int) -> float:
    try:
        value = float(text)
    except ValueError as exc:
        raise ParseError(f"bad {name} {text!r}", row=row) from exc
    if not math.isfinite(value):
        raise ParseError(f"non-finite {name} {text!r}", row=row)
    if value <= 0:
        raise ValidationError(f"{name} must be positive, got {value!r}", row=row)
    return value


def _rows(source, header: Sequence[str]) -> Iterator[tuple[int, list[str]]]:
    """Yield ``(line_number, fields)``; line 1 is the header. Blank and ``#`` lines skipped."""
    stream, owned = _open_text(source)
    try:
        reader = csv.reader(stream)
        seen_header = False
        for row in reader:
            lineno = reader.line_num
            if not row or (row[0].startswith("#")):
                continue
            if not seen_header:
                if tuple(c.strip() for c in row) != tuple(header):
                    raise ParseError(f"expected header {','.join(header)}, got {','.join(row)}", row=lineno)
                seen_header = True
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", row=lineno)
            yield lineno, row
        if not seen_header:
            raise ParseError("missing header", row=1)
    finally:
        if owned:
            stream.close()


def read_price_records(source) -> Iterator[PriceRecord]:
    for lineno, (symbol, day, close) in _rows(source, PRICE_HEADER):
        symbol = symbol.strip()
        if not symbol:
            raise ParseError("empty symbol", row=lineno)
        yield PriceRecord(symbol, _parse_date(day, lineno), _parse_positive(close, "close", lineno))


def ingest_prices(source) -> PricePanel:
    """Build a panel from a ``symbol,date,close`` CSV path, text stream or record iterable.

    The calendar is the sorted union of every observed date; symbols are
    sorted lexicographically.
    """
    if isinstance(source, (str, Path, io.IOBase)) or hasattr(source, "read"):
        records = read_price_records(source)
    else:
        records = source

    seen: dict[tuple[str, date], int] = {}
    syms: list[str] = []
    days: list[date] = []
    closes: list[float] = []
    for n, rec in enumerate(records, start=2):
        if not isinstance(rec, PriceRecord):
            rec = PriceRecord(*rec)
        if not rec.close > 0:
            raise ValidationError(f"close must be positive, got {rec.close!r}", row=n)
        key = (rec.symbol, rec.date)
        if key in seen:
            raise ValidationError(f"duplicate record for {rec.symbol} on {rec.date}", row=n)
        seen[key] = n
        syms.append(rec.symbol)
        days.append(rec.date)
        closes.append(rec.close)

    calendar = TradingCalendar(tuple(sorted(set(days))))
    symbols = tuple(sorted(set(syms)))
    day_ix = {d: t for t, d in enumerate(calendar.days)}
    sym_ix = {s: i for i, s in enumerate(symbols)}
    prices = np.full((len(symbols), len(calendar)), np.nan)
    if closes:
        rows = np.fromiter((sym_ix[s] for s in syms), dtype=np.intp, count=len(syms))
        cols = np.fromiter((day_ix[d] for d in days), dtype=np.intp, count=len(days))
        prices[rows, cols] = closes
    logger.info("ingested %d records: %d symbols x %d days", len(closes), len(symbols), len(calendar))
    return PricePanel(calendar, symbols, prices)


def ingest_index(source) -> IndexSeries:
    """Read a ``date,open,close`` index CSV (or iterable of tuples) into a date-sorted series."""
    if isinstance(source, (str, Path)) or hasattr(source, "read"):
        rows = [
            (_parse_date(d, n), _parse_positive(o, "open", n), _parse_positive(c, "close", n), n)
            for n, (d, o, c) in _rows(source, INDEX_HEADER)
        ]
    else:
        rows = []
        for n, (d, o, c) in enumerate(source, start=2):
            if not (o > 0 and c > 0):
                raise ValidationError(f"index levels must be positive, got open={o!r} close={c!r}", row=n)
            rows.append((d, float(o), float(c), n))

    seen: set[date] = set()
    for d, _, _, n in rows:
        if d in seen:
            raise ValidationError(f"duplicate index date {d}", row=n)
        seen.add(d)
    rows.sort(key=lambda r: r[0])
    return IndexSeries(
        tuple(r[0] for r in rows),
        np.array([r[1] for r in rows], dtype=np.float64),
        np.array([r[2] for r in rows], dtype=np.float64),
    )


def compute_returns(panel: PricePanel) -> ReturnPanel:
    logp = np.log(panel.prices)
    returns = logp[:, 1:] - logp[:, :-1]
    present = panel.availability[:, 1:] & panel.availability[:, :-1]
    returns[~present] = np.nan
    returns.setflags(write=False)
    return ReturnPanel(panel.calendar, panel.symbols, returns, present)


def write_prices_csv(panel: PricePanel, dest, header_comment: str | None = None) -> None:
    """Write the canonical ``symbol,date,close`` CSV; ``repr`` keeps floats bit-exact."""
    stream, owned = (open(dest, "w", newline="", encoding="utf-8"), True) if isinstance(dest, (str, Path)) else (dest, False)
    try:
        if header_comment:
            stream.write(f"# {header_comment}\n")
        stream.write(",".join(PRICE_HEADER) + "\n")
        iso = [d.isoformat() for d in panel.calendar.days]
        for i, sym in enumerate(panel.symbols):
            row = panel.prices[i]
            for t in np.flatnonzero(panel.availability[i]):
                stream.write(f"{sym},{iso[t]},{float(row[t])!r}\n")
    finally:
        if owned:
            stream.close()


def write_index_csv(index: IndexSeries, dest) -> None:
    with open(dest, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(INDEX_HEADER) + "\n")
        for d, o, c in zip(index.dates, index.open, index.close):
            fh.write(f"{d.isoformat()},{float(o)!r},{float(c)!r}\n")
