"""Per-window Pearson correlation of log returns and its pairwise distribution summary."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import UndefinedSummaryError, ValidationError
from .marketdata import ReturnPanel
from .windows import WindowSpec

CORR_MAGIC = b"SGNCORR1"
# relative tolerance below which a centred series counts as constant
_ZERO_VAR_RTOL = 1e-13


@dataclass(frozen=True, eq=False)
class CorrMatrix:
    rho: np.ndarray
    roster: tuple[str, ...]
    excluded: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return len(self.roster)

    def off_diagonal(self) -> np.ndarray:
        """Upper-triangle values, one per unordered pair."""
        iu = np.triu_indices(self.n, k=1)
        return self.rho[iu]


@dataclass(frozen=True)
class CorrSummary:
    n_pairs: int
    p_neg: float
    p_pos: float
    p_zero: float
    rho_min: float
    rho_max: float
    mean: float
    # None when the pairwise distribution has zero variance
    kurtosis: float | None
    skewness: float | None


def window_returns(returns: ReturnPanel, window: WindowSpec) -> np.ndarray:
    """The ``len(eligible) x (L-1)`` block of in-window returns."""
    cols = slice(window.start_day - 1, window.end_day - 1)
    return returns.returns[list(window.eligible), cols]


def correlation_matrix(R: np.ndarray, roster: Sequence[str]) -> CorrMatrix:
    """Pearson correlation between the rows of ``R`` (stocks x return days).

    Each row is centred and scaled to unit norm, so the matrix is one
    product ``Z @ Z.T``. Constant rows have no defined correlation; they
    are dropped and listed in ``excluded``.
    """
    R = np.asarray(R, dtype=np.float64)
    roster = tuple(roster)
    if R.ndim != 2 or R.shape[0] != len(roster):
        raise ValueError(f"returns shape {R.shape} does not match roster of {len(roster)}")
    if not np.all(np.isfinite(R)):
        bad = [roster[i] for i in np.flatnonzero(~np.isfinite(R).all(axis=1))]
        raise ValidationError(f"non-finite returns for {', '.join(bad)}")

    Z = R - R.mean(axis=1, keepdims=True)
    norms = np.sqrt(np.einsum("ij,ij->i", Z, Z))
    scale = np.abs(R).max(axis=1, initial=0.0) * np.sqrt(R.shape[1])
    constant = norms <= _ZERO_VAR_RTOL * scale
    if constant.any():
        keep = ~constant
        excluded = tuple(roster[i] for i in np.flatnonzero(constant))
        Z, norms = Z[keep], norms[keep]
        roster = tuple(s for s, k in zip(roster, keep) if k)
    else:
        excluded = ()

    Z /= norms[:, None]
    rho = Z @ Z.T
    rho = 0.5 * (rho + rho.T)
    np.clip(rho, -1.0, 1.0, out=rho)
    np.fill_diagonal(rho, 1.0)
    rho.setflags(write=False)
    return CorrMatrix(rho, roster, excluded)


def moment_summary(values: np.ndarray) -> CorrSummary:
    """Sign fractions and population moments of a sample, with its extremes.

    Kurtosis is non-excess (Gaussian 3) and skewness the standardized
    third moment (Gaussian 0).
    """
    x = np.asarray(values, dtype=np.float64).ravel()
    n = x.size
    if n < 1:
        raise UndefinedSummaryError("no values to summarize")
    mean = float(x.mean())
    d = x - mean
    m2 = float(np.mean(d * d))
    scale = float(np.abs(x).max())
    if x.min() < x.max() and m2 > (1e-14 * scale) ** 2:
        m3 = float(np.mean(d ** 3))
        m4 = float(np.mean(d ** 4))
        kurt, skew = m4 / (m2 * m2), m3 / m2 ** 1.5
    else:
        kurt = skew = None
    n_neg = int(np.count_nonzero(x < 0))
    n_pos = int(np.count_nonzero(x > 0))
    return CorrSummary(
        n_pairs=n,
        p_neg=n_neg / n,
        p_pos=n_pos / n,
        p_zero=(n - n_neg - n_pos) / n,
        rho_min=float(x.min()),
        rho_max=float(x.max()),
        mean=mean,
        kurtosis=kurt,
        skewness=skew,
    )


def summarize(corr: CorrMatrix) -> CorrSummary:
    if corr.n < 2:
        raise UndefinedSummaryError(f"need at least 2 stocks, got {corr.n}")
    return moment_summary(corr.off_diagonal())


def write_corr_binary(corr: CorrMatrix, path) -> None:
    """Dump as magic, uint64 n, n length-prefixed UTF-8 symbols, then row-major float64."""
    with open(path, "wb") as fh:
        fh.write(CORR_MAGIC)
        fh.write(struct.pack("<Q", corr.n))
        for sym in corr.roster:
            raw = sym.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
        fh.write(np.ascontiguousarray(corr.rho, dtype="<f8").tobytes())


def read_corr_binary(path) -> CorrMatrix:
    data = Path(path).read_bytes()
    if data[:8] != CORR_MAGIC:
        raise ValidationError(f"{path}: not a correlation dump")
    (n,) = struct.unpack_from("<Q", data, 8)
    pos = 16
    roster = []
    for _ in range(n):
        (k,) = struct.unpack_from("<H", data, pos)
        roster.append(data[pos + 2:pos + 2 + k].decode("utf-8"))
        pos += 2 + k
    rho = np.frombuffer(data, dtype="<f8", count=n * n, offset=pos).reshape(n, n).copy()
    return CorrMatrix(rho, tuple(roster))
