"""Strength-distribution shape: log-binned density, power-law fit in log space,
and generalized Pareto tail fits by maximum likelihood."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import norm

from .errors import DegenerateBinningError, FitError, InsufficientTailError

DEFAULT_BINS = 20
DEFAULT_TAIL_FRACTION = 0.10
MIN_EXCEEDANCES = 20
XI_BRACKET = (-1.0, 2.0)
CI_MIN_XI = -0.5
_GRID_STEP = 0.05
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
# below this |xi| the likelihood uses the exponential limit
_XI_ZERO = 1e-9


@dataclass(frozen=True, eq=False)
class EmpiricalPdf:
    bin_centers: np.ndarray
    densities: np.ndarray
    bin_edges: np.ndarray
    counts: np.ndarray

    @property
    def bin_widths(self) -> np.ndarray:
        return self.bin_hi - self.bin_lo

    @property
    def bin_lo(self) -> np.ndarray:
        return self.bin_edges[:-1][self._occupied]

    @property
    def bin_hi(self) -> np.ndarray:
        return self.bin_edges[1:][self._occupied]

    @property
    def _occupied(self) -> np.ndarray:
        return self.counts > 0

    def mass(self) -> float:
        return float(np.sum(self.densities * self.bin_widths))


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    log_amplitude: float
    fit_range: tuple[float, float]
    residual: float
    n_points: int

    @property
    def amplitude(self) -> float:
        return float(np.exp(self.log_amplitude))


@dataclass(frozen=True)
class GpdFit:
    xi: float
    sigma: float
    threshold: float
    n_exceed: int
    loglik: float
    se: float | None = None
    ci_low: float | None = None
    ci_high: float | None = None

    @property
    def heavy_tail(self) -> bool:
        return self.xi > 0


def empirical_pdf(values, n_bins: int = DEFAULT_BINS) -> EmpiricalPdf:
    """Histogram density on ``n_bins`` log-spaced bins spanning ``[min, max]``.

    Empty bins are dropped from the centres/densities but kept in ``counts``
    and ``bin_edges``.
    """
    x = np.asarray(values, dtype=np.float64).ravel()
    if n_bins < 2:
        raise ValueError(f"n_bins must be >= 2, got {n_bins}")
    if x.size == 0 or np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise ValueError("values must be finite and positive")
    if np.unique(x).size < n_bins:
        raise DegenerateBinningError(f"fewer than {n_bins} distinct values")
    edges = np.geomspace(x.min(), x.max(), n_bins + 1)
    edges[0], edges[-1] = x.min(), x.max()
    counts, _ = np.histogram(x, bins=edges)
    widths = np.diff(edges)
    occ = counts > 0
    return EmpiricalPdf(
        bin_centers=np.sqrt(edges[:-1] * edges[1:])[occ],
        densities=(counts / (x.size * widths))[occ],
        bin_edges=edges,
        counts=counts,
    )


def default_fit_range(pdf: EmpiricalPdf) -> tuple[float, float]:
    """Upper half of the occupied bins."""
    centers = pdf.bin_centers
    lo = len(centers) // 2
    return float(centers[lo]), float(centers[-1])


def fit_power_law(pdf: EmpiricalPdf, fit_range: tuple[float, float] | None = None) -> PowerLawFit:
    """Least squares of ``log density = log A - exponent * log s`` over in-range bins."""
    if fit_range is None:
        fit_range = default_fit_range(pdf)
    lo, hi = fit_range
    sel = (pdf.bin_centers >= lo) & (pdf.bin_centers <= hi) & (pdf.densities > 0)
    if np.count_nonzero(sel) < 3:
        raise FitError(f"need >= 3 occupied bins in [{lo:g}, {hi:g}], got {np.count_nonzero(sel)}")
    ls = np.log(pdf.bin_centers[sel])
    ld = np.log(pdf.densities[sel])
    if np.ptp(ls) == 0:
        raise FitError("singular design: all bins at one abscissa")
    X = np.column_stack([np.ones_like(ls), -ls])
    (log_amp, exponent), *_ = np.linalg.lstsq(X, ld, rcond=None)
    resid = ld - X @ np.array([log_amp, exponent])
    return PowerLawFit(
        exponent=float(exponent),
        log_amplitude=float(log_amp),
        fit_range=(float(lo), float(hi)),
        residual=float(np.sqrt(np.mean(resid ** 2))),
        n_points=int(np.count_nonzero(sel)),
    )


def gpd_loglik(xi: float, sigma: float, excess: np.ndarray) -> float:
    """GPD log-likelihood of nonnegative exceedances; ``-inf`` outside the support."""
    if not sigma > 0:
        return -math.inf
    y = excess / sigma
    n = y.size
    if abs(xi) < _XI_ZERO:
        return -n * math.log(sigma) - float(y.sum())
    z = xi * y
    if z.min() <= -1.0:
        if xi == -1.0 and z.min() == -1.0:
            return -n * math.log(sigma)
        return -math.inf
    return -n * math.log(sigma) - (1.0 + 1.0 / xi) * float(np.log1p(z).sum())


def gpd_hessian(xi: float, sigma: float, excess: np.ndarray) -> np.ndarray:
    """Analytic Hessian of the log-likelihood in ``(xi, sigma)``."""
    x = np.asarray(excess, dtype=np.float64)
    n = x.size
    y = x / sigma
    z = 1.0 + xi * y
    a = x / z
    Sa, Sa2 = a.sum(), (a * a).sum()
    l_ss = n / sigma ** 2 - 2.0 * (1.0 + xi) / sigma ** 3 * Sa + xi * (1.0 + xi) / sigma ** 4 * Sa2
    l_xs = Sa / sigma ** 2 - (1.0 + xi) / sigma ** 3 * Sa2
    if abs(xi) < 1e-5:
        # series about xi = 0; the closed form cancels catastrophically here
        S2, S3, S4 = (y ** 2).sum(), (y ** 3).sum(), (y ** 4).sum()
        l_xx = S2 - 2.0 * S3 / 3.0 + xi * (1.5 * S4 - 2.0 * S3)
    else:
        l_xx = (-2.0 / xi ** 3 * np.log1p(xi * y).sum()
                + 2.0 / (xi ** 2 * sigma) * Sa
                + (1.0 + 1.0 / xi) / sigma ** 2 * Sa2)
    return np.array([[l_xx, l_xs], [l_xs, l_ss]])


def _profile_sigma(xi: float, excess: np.ndarray, xmax: float, xmean: float) -> tuple[float, float]:
    """Best ``sigma`` for fixed ``xi``; returns ``(sigma, loglik)``."""
    lower = max(-xi * xmax, 0.0)
    lo = math.log(lower * (1.0 + 1e-12) if lower > 0 else 1e-8 * xmean)
    hi = math.log(2.0 * (1.0 + abs(xi)) * max(xmax, xmean))
    res = minimize_scalar(
        lambda t: -gpd_loglik(xi, math.exp(t), excess),
        bounds=(lo, hi), method="bounded", options={"xatol": 1e-10},
    )
    sigma = math.exp(res.x)
    ll = gpd_loglik(xi, sigma, excess)
    if xi == -1.0:
        # likelihood is -n log(sigma), maximised on the support boundary
        ll_edge = gpd_loglik(xi, xmax, excess)
        if ll_edge >= ll:
            return xmax, ll_edge
    return sigma, ll


def _golden_max(f, a: float, b: float, tol: float = 1e-8) -> float:
    c, d = b - _GOLDEN * (b - a), a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def tail_split(values, tail_fraction: float) -> tuple[float, np.ndarray]:
    """Threshold and exceedances for the top ``ceil(tail_fraction * n)`` values.

    The threshold is the largest value outside the tail (the lower empirical
    ``1 - tail_fraction`` quantile); with ``tail_fraction == 1`` it is the
    sample minimum, which then contributes a zero exceedance.
    """
    x = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if not 0 < tail_fraction <= 1:
        raise ValueError(f"tail_fraction must lie in (0, 1], got {tail_fraction}")
    n = x.size
    k = min(n, math.ceil(tail_fraction * n - 1e-9))
    u = x[n - k - 1] if k < n else x[0]
    return float(u), x[n - k:] - u


def fit_gpd_excess(excess, threshold: float = 0.0, confidence: float = 0.95) -> GpdFit:
    """Maximum-likelihood GPD fit to exceedances.

    ``xi`` is profiled over ``[-1, 2]`` on a coarse grid, refined by golden
    section; ``sigma`` is optimised for each ``xi``. The Wald interval from
    the observed information is reported only for ``xi >= -0.5``.
    """
    excess = np.asarray(excess, dtype=np.float64)
    n = excess.size
    if n < MIN_EXCEEDANCES:
        raise InsufficientTailError(f"{n} exceedances, need >= {MIN_EXCEEDANCES}")
    if np.any(excess < 0) or not np.all(np.isfinite(excess)):
        raise FitError("exceedances must be finite and nonnegative")
    xmax, xmean = float(excess.max()), float(excess.mean())
    if xmax <= 0:
        raise FitError("all exceedances are zero")

    def profile(xi):
        return _profile_sigma(xi, excess, xmax, xmean)[1]

    grid = np.arange(XI_BRACKET[0], XI_BRACKET[1] + _GRID_STEP / 2, _GRID_STEP)
    ll = np.array([profile(float(g)) for g in grid])
    if not np.any(np.isfinite(ll)):
        raise FitError(f"likelihood not finite anywhere on xi grid (n={n}, max={xmax:g})")
    i = int(np.nanargmax(ll))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    xi = _golden_max(profile, float(a), float(b))
    if profile(xi) < ll[i]:
        xi = float(grid[i])
    sigma, loglik = _profile_sigma(xi, excess, xmax, xmean)
    if not np.isfinite(loglik):
        raise FitError(f"fit failed to converge: xi={xi:g}, sigma={sigma:g}")

    se = ci_low = ci_high = None
    if xi >= CI_MIN_XI:
        info = -gpd_hessian(xi, sigma, excess)
        if np.all(np.isfinite(info)) and np.linalg.det(info) > 0 and info[0, 0] > 0:
            var = np.linalg.inv(info)[0, 0]
            if var > 0:
                se = float(math.sqrt(var))
                half = float(norm.ppf(0.5 + confidence / 2)) * se
                ci_low, ci_high = xi - half, xi + half
    return GpdFit(xi=float(xi), sigma=float(sigma), threshold=float(threshold), n_exceed=n,
                  loglik=float(loglik), se=se, ci_low=ci_low, ci_high=ci_high)


def fit_gpd(values, tail_fraction: float = DEFAULT_TAIL_FRACTION, confidence: float = 0.95) -> GpdFit:
    """GPD fit to the upper ``tail_fraction`` of a positive sample."""
    x = np.asarray(values, dtype=np.float64).ravel()
    k = math.ceil(tail_fraction * x.size - 1e-9)
    if k < MIN_EXCEEDANCES:
        raise InsufficientTailError(f"{k} exceedances from n={x.size}, need >= {MIN_EXCEEDANCES}")
    u, excess = tail_split(x, tail_fraction)
    return fit_gpd_excess(excess, threshold=u, confidence=confidence)


def gpd_sample(xi: float, sigma: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF draws from GPD(xi, sigma) with zero location."""
    u = rng.random(size)
    if xi == 0:
        return -sigma * np.log1p(-u)
    return sigma / xi * ((1.0 - u) ** (-xi) - 1.0)


def write_pdf(pdf: EmpiricalPdf, dest) -> None:
    with open(dest, "w", encoding="utf-8", newline="") as fh:
        fh.write("s,density\n")
        for s, d in zip(pdf.bin_centers, pdf.densities):
            fh.write(f"{float(s)!r},{float(d)!r}\n")
