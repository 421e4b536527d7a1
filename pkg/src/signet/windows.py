"""Sliding-window enumeration and per-window stock eligibility."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, EmptyAnalysisError
from .marketdata import PricePanel

DEFAULT_WINDOW_LENGTH = 26
DEFAULT_STEP = 15
DEFAULT_THETA = 0.0


@dataclass(frozen=True)
class WindowParams:
    L: int = DEFAULT_WINDOW_LENGTH
    dt: int = DEFAULT_STEP
    theta: float = DEFAULT_THETA

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 3:
            raise ConfigError(f"window length must be an integer >= 3, got {self.L}")
        if int(self.dt) != self.dt or self.dt < 1:
            raise ConfigError(f"step must be an integer >= 1, got {self.dt}")
        if not 0 <= self.theta < 1:
            raise ConfigError(f"theta must lie in [0, 1), got {self.theta}")


@dataclass(frozen=True)
class WindowSpec:
    """One window; ``start_day``/``end_day`` are 1-based inclusive calendar offsets."""

    m: int
    start_day: int
    end_day: int
    eligible: tuple[int, ...] = ()

    @property
    def length(self) -> int:
        return self.end_day - self.start_day + 1


def window_count(n_days: int, L: int, dt: int) -> int:
    return 0 if n_days < L else (n_days - L) // dt + 1


def enumerate_windows(n_days: int, params: WindowParams) -> list[tuple[int, int]]:
    """All ``(start_day, end_day)`` with ``(m-1)*dt + L <= n_days``, in increasing ``m``."""
    if n_days < params.L:
        raise EmptyAnalysisError(f"calendar of {n_days} days is shorter than window length {params.L}")
    return [
        (1 + (m - 1) * params.dt, (m - 1) * params.dt + params.L)
        for m in range(1, window_count(n_days, params.L, params.dt) + 1)
    ]


def eligible_stocks(panel: PricePanel, window: tuple[int, int]) -> tuple[int, ...]:
    """Stocks priced on every day of the window, in roster order."""
    start, end = window
    if start < 1 or end > panel.n_days or end < start:
        raise ValueError(f"window {window} outside calendar of {panel.n_days} days")
    full = panel.availability[:, start - 1:end].all(axis=1)
    return tuple(int(i) for i in np.flatnonzero(full))


def window_specs(panel: PricePanel, params: WindowParams) -> list[WindowSpec]:
    return [
        WindowSpec(m, s, e, eligible_stocks(panel, (s, e)))
        for m, (s, e) in enumerate(enumerate_windows(panel.n_days, params), start=1)
    ]
