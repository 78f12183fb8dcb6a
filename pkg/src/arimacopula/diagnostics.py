"""Correlograms and residual tests: ACF, PACF, Ljung-Box, Shapiro-Wilk."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy import special, stats

from .errors import (
    DegenerateSeries,
    InvalidDf,
    LagTooLarge,
    NumericalBreakdown,
    SampleSizeUnsupported,
)
from .series import Series


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    df_or_n: int
    test_name: str

    __test__ = False  # not a pytest class

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Correlogram:
    lags: np.ndarray
    values: np.ndarray
    ci_bound: float

    def rows(self):
        """``(lag, value, ci)`` tuples, the CSV layout."""
        return [(int(k), float(v), self.ci_bound) for k, v in zip(self.lags, self.values)]


def _as_array(x) -> np.ndarray:
    if isinstance(x, Series):
        return np.asarray(x.values, dtype=float)
    return np.asarray(x, dtype=float).reshape(-1)


def default_lags(n: int) -> int:
    """Ljung-Box lag count used when none is given: ``min(10, n // 5)``."""
    return int(min(10, n // 5))


def _autocov(x: np.ndarray, max_lag: int) -> np.ndarray:
    n = x.size
    if max_lag >= n:
        raise LagTooLarge(f"max_lag {max_lag} must be below the length {n}")
    xc = x - x.mean()
    denom = np.dot(xc, xc)
    if denom <= 0 or not np.isfinite(denom):
        raise DegenerateSeries("series has zero variance")
    return np.array([np.dot(xc[: n - k], xc[k:]) for k in range(max_lag + 1)]) / n


def acf(x, max_lag: int) -> Correlogram:
    """Sample autocorrelations ``r_1 .. r_max_lag``."""
    x = _as_array(x)
    g = _autocov(x, max_lag)
    return Correlogram(np.arange(1, max_lag + 1), g[1:] / g[0], 2.0 / np.sqrt(x.size))


def durbin_levinson(gamma: np.ndarray) -> np.ndarray:
    """Partial autocorrelations from autocovariances ``gamma[0..K]``.

    Returns the lag-1..K partial autocorrelations.
    """
    gamma = np.asarray(gamma, dtype=float)
    K = gamma.size - 1
    out = np.empty(K)
    phi = np.zeros(0)
    v = gamma[0]
    for k in range(1, K + 1):
        if not v > 0:
            raise NumericalBreakdown(f"prediction variance {v} at step {k}")
        a = (gamma[k] - np.dot(phi, gamma[k - 1 : 0 : -1])) / v
        phi = np.concatenate([phi - a * phi[::-1], [a]])
        v *= 1.0 - a * a
        out[k - 1] = a
    return out


def pacf(x, max_lag: int) -> Correlogram:
    x = _as_array(x)
    g = _autocov(x, max_lag)
    return Correlogram(np.arange(1, max_lag + 1), durbin_levinson(g), 2.0 / np.sqrt(x.size))


def ljung_box(x, lags: int | None = None, fitdf: int = 0, box_pierce: bool = False) -> TestResult:
    """Portmanteau test of no autocorrelation up to ``lags``.

    ``Q = n(n+2) sum r_k^2/(n-k)``, or ``n sum r_k^2`` with ``box_pierce``;
    referred to chi-square with ``lags - fitdf`` degrees of freedom.
    """
    x = _as_array(x)
    n = x.size
    h = default_lags(n) if lags is None else int(lags)
    if h <= fitdf:
        raise InvalidDf(f"lags ({h}) must exceed fitdf ({fitdf})")
    r = acf(x, h).values
    if box_pierce:
        q = n * np.sum(r**2)
        name = "Box-Pierce"
    else:
        q = n * (n + 2) * np.sum(r**2 / (n - np.arange(1, h + 1)))
        name = "Ljung-Box"
    df = h - fitdf
    return TestResult(float(q), float(stats.chi2.sf(q, df)), df, name)


def _poly(c, x):
    # c[0] + c[1] x + c[2] x^2 + ...
    return np.polynomial.polynomial.polyval(x, c)


def shapiro_wilk(x) -> TestResult:
    """Shapiro-Wilk W with Royston's (1995) approximations, 12 <= n <= 5000."""
    x = np.sort(_as_array(x))
    n = x.size
    if not 12 <= n <= 5000:
        raise SampleSizeUnsupported(f"n={n} outside [12, 5000]")
    if x[-1] - x[0] <= 0:
        raise DegenerateSeries("all values identical")
    i = np.arange(1, n + 1)
    m = special.ndtri((i - 0.375) / (n + 0.25))
    mm = np.dot(m, m)
    u = 1.0 / np.sqrt(n)
    an = m[-1] / np.sqrt(mm) + _poly([0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056], u)
    an1 = m[-2] / np.sqrt(mm) + _poly([0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633], u)
    phi = (mm - 2 * m[-1] ** 2 - 2 * m[-2] ** 2) / (1 - 2 * an**2 - 2 * an1**2)
    a = m / np.sqrt(phi)
    a[-1], a[-2] = an, an1
    a[0], a[1] = -an, -an1
    xc = x - x.mean()
    w = np.dot(a, x) ** 2 / np.dot(xc, xc)
    w = min(float(w), 1.0)
    ln = np.log(n)
    mu = _poly([-1.5861, -0.31082, -0.083751, 0.0038915], ln)
    sigma = np.exp(_poly([-0.4803, -0.082676, 0.0030302], ln))
    if w >= 1.0:
        p = 1.0
    else:
        p = float(special.ndtr(-(np.log1p(-w) - mu) / sigma))
    return TestResult(w, min(max(p, 0.0), 1.0), n, "Shapiro-Wilk")
