"""One-parameter bivariate copula families.

Every family is exchangeable, so the conditional distribution of ``U`` given
``V`` uses the same formulas as ``V`` given ``U``.

Functional forms (u, v in the unit square):

* independence: ``uv``
* normal / t: elliptical, via the bivariate normal or t CDF of the quantiles
* frank: ``-log(1 + (e^{-tu}-1)(e^{-tv}-1)/(e^{-t}-1)) / t``
* clayton: ``(u^-t + v^-t - 1)^(-1/t)``
* gumbel: ``exp(-((-log u)^t + (-log v)^t)^(1/t))``
* plackett: root of the odds-ratio equation ``C(1-u-v+C) = t(u-C)(v-C)``

Frank at ``theta = 0`` and Plackett at ``theta = 1`` are accepted as their
independence limits.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize, special, stats

from ..errors import BoundaryPoint, InvalidParameter, TauOutOfRange
from .bivariate import bvn_cdf, bvt_cdf


class Family(str, enum.Enum):
    INDEPENDENCE = "independence"
    NORMAL = "normal"
    T = "t"
    FRANK = "frank"
    CLAYTON = "clayton"
    GUMBEL = "gumbel"
    PLACKETT = "plackett"

    @classmethod
    def parse(cls, name) -> "Family":
        if isinstance(name, Family):
            return name
        key = str(name).strip().lower().replace("-", "").replace("_", "")
        try:
            return cls(_ALIASES.get(key, key))
        except ValueError:
            raise InvalidParameter(f"unknown copula family {name!r}") from None

    @property
    def elliptical(self) -> bool:
        return self in (Family.NORMAL, Family.T)


_ALIASES = {
    "gaussian": "normal",
    "studentt": "t",
    "student": "t",
    "product": "independence",
    "indep": "independence",
}

DEFAULT_T_DF = 25.0

FIT_METHODS = ("tau_inversion", "pseudo_mle", "fixed")


@dataclass(frozen=True)
class FittedCopula:
    """A copula family with its parameter.

    ``theta`` is the correlation ``R`` for the elliptical families and is
    ignored for independence. ``df`` is used by the t family only.
    """

    family: Family
    theta: float = 0.0
    df: float | None = None
    fit_method: str = "fixed"

    def __post_init__(self):
        fam = Family.parse(self.family)
        object.__setattr__(self, "family", fam)
        th = float(self.theta)
        object.__setattr__(self, "theta", th)
        if fam is Family.T:
            df = DEFAULT_T_DF if self.df is None else float(self.df)
            if not df > 2:
                raise InvalidParameter(f"t copula needs df > 2, got {df}")
            object.__setattr__(self, "df", df)
        else:
            object.__setattr__(self, "df", None)
        if self.fit_method not in FIT_METHODS:
            raise InvalidParameter(f"unknown fit method {self.fit_method!r}")
        check_parameter(fam, th)

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "theta": self.theta,
            "df": self.df,
            "method": self.fit_method,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FittedCopula":
        return cls(d["family"], d.get("theta", 0.0), d.get("df"), d.get("method", "fixed"))


def check_parameter(family: Family, theta: float) -> None:
    ok = {
        Family.INDEPENDENCE: True,
        Family.NORMAL: -1.0 < theta < 1.0,
        Family.T: -1.0 < theta < 1.0,
        Family.FRANK: np.isfinite(theta),
        Family.CLAYTON: 0.0 < theta < np.inf,
        Family.GUMBEL: 1.0 <= theta < np.inf,
        Family.PLACKETT: 0.0 < theta < np.inf,
    }[family]
    if not ok:
        raise InvalidParameter(f"{family.value} parameter {theta} outside its domain")


# -- distribution functions ---------------------------------------------------

def _interior_cdf(c: FittedCopula, u, v):
    th = c.theta
    f = c.family
    if f is Family.INDEPENDENCE or (f is Family.FRANK and th == 0.0) or (
        f is Family.PLACKETT and th == 1.0
    ):
        return u * v
    if f is Family.NORMAL:
        return bvn_cdf(special.ndtri(u), special.ndtri(v), th)
    if f is Family.T:
        return bvt_cdf(stats.t.ppf(u, c.df), stats.t.ppf(v, c.df), th, c.df)
    if f is Family.CLAYTON:
        # log1p/expm1 form keeps precision for small theta
        with np.errstate(over="ignore"):
            s = np.expm1(-th * np.log(u)) + np.expm1(-th * np.log(v))
            return np.exp(-np.log1p(s) / th)
    if f is Family.GUMBEL:
        a = (-np.log(u)) ** th + (-np.log(v)) ** th
        return np.exp(-(a ** (1.0 / th)))
    if f is Family.FRANK:
        return -np.log1p(np.expm1(-th * u) * np.expm1(-th * v) / np.expm1(-th)) / th
    # plackett
    s = 1.0 + (th - 1.0) * (u + v)
    root = np.sqrt(np.maximum(s * s - 4.0 * u * v * th * (th - 1.0), 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        # rationalized branch avoids cancellation whenever s >= 0
        stable = 2.0 * u * v * th / (s + root)
        direct = (s - root) / (2.0 * (th - 1.0))
    return np.where(s >= 0, stable, direct)


def copula_cdf(c: FittedCopula, u, v):
    """``C(u, v)``; exact on the boundary of the unit square."""
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    if np.any((u < 0) | (u > 1) | (v < 0) | (v > 1)):
        raise InvalidParameter("copula arguments must lie in [0, 1]")
    out = np.empty(u.shape)
    zero = (u == 0) | (v == 0)
    u_one = ~zero & (u == 1)
    v_one = ~zero & ~u_one & (v == 1)
    inner = ~(zero | u_one | v_one)
    out[zero] = 0.0
    out[u_one] = v[u_one]
    out[v_one] = u[v_one]
    if np.any(inner):
        val = _interior_cdf(c, u[inner], v[inner])
        # enforce the Frechet bounds against rounding
        lo = np.maximum(u[inner] + v[inner] - 1.0, 0.0)
        out[inner] = np.clip(val, lo, np.minimum(u[inner], v[inner]))
    return out if out.ndim else float(out)


def copula_density(c: FittedCopula, u, v):
    """``c(u, v) = d^2 C / du dv`` on the open unit square."""
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    if np.any((u <= 0) | (u >= 1) | (v <= 0) | (v >= 1)):
        raise BoundaryPoint("density is defined on the open unit square only")
    out = np.exp(_log_density(c, u, v))
    return out if out.ndim else float(out)


def log_density(c: FittedCopula, u, v):
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    if np.any((u <= 0) | (u >= 1) | (v <= 0) | (v >= 1)):
        raise BoundaryPoint("density is defined on the open unit square only")
    return _log_density(c, u, v)


def _log_density(c: FittedCopula, u, v):
    th, f = c.theta, c.family
    if f is Family.INDEPENDENCE or (f is Family.FRANK and th == 0.0) or (
        f is Family.PLACKETT and th == 1.0
    ):
        return np.zeros(u.shape)
    if f is Family.NORMAL:
        x, y = special.ndtri(u), special.ndtri(v)
        one_r2 = 1.0 - th * th
        return -0.5 * np.log(one_r2) - (th * th * (x * x + y * y) - 2.0 * th * x * y) / (2.0 * one_r2)
    if f is Family.T:
        nu = c.df
        x, y = stats.t.ppf(u, nu), stats.t.ppf(v, nu)
        one_r2 = 1.0 - th * th
        log_joint = (
            special.gammaln((nu + 2.0) / 2.0)
            - special.gammaln(nu / 2.0)
            - np.log(nu * np.pi)
            - 0.5 * np.log(one_r2)
            - (nu + 2.0) / 2.0 * np.log1p((x * x - 2.0 * th * x * y + y * y) / (nu * one_r2))
        )
        return log_joint - stats.t.logpdf(x, nu) - stats.t.logpdf(y, nu)
    lu, lv = np.log(u), np.log(v)
    if f is Family.CLAYTON:
        # u^-t + v^-t - 1 computed as expm1 sums to keep precision near (1, 1)
        s = np.expm1(-th * lu) + np.expm1(-th * lv) + 1.0
        return np.log1p(th) - (th + 1.0) * (lu + lv) - (1.0 / th + 2.0) * np.log(s)
    if f is Family.GUMBEL:
        x, y = -lu, -lv
        a = x**th + y**th
        a1 = a ** (1.0 / th)
        return (-a1 - lu - lv + (th - 1.0) * (np.log(x) + np.log(y))
                + (1.0 / th - 2.0) * np.log(a) + np.log(a1 + th - 1.0))
    if f is Family.FRANK:
        em = -np.expm1(-th)
        eu, ev = -np.expm1(-th * u), -np.expm1(-th * v)
        return np.log(th * em) - th * (u + v) - 2.0 * np.log(np.abs(em - eu * ev))
    s = 1.0 + (th - 1.0) * (u + v)
    disc = s * s - 4.0 * th * (th - 1.0) * u * v
    return np.log(th) + np.log1p((th - 1.0) * (u + v - 2.0 * u * v)) - 1.5 * np.log(disc)


def h_function(c: FittedCopula, v, given):
    """Conditional CDF ``P(V <= v | U = given) = dC/du`` at ``(given, v)``."""
    u = np.asarray(given, dtype=float)
    v = np.asarray(v, dtype=float)
    th, f = c.theta, c.family
    if f is Family.INDEPENDENCE or (f is Family.FRANK and th == 0.0) or (
        f is Family.PLACKETT and th == 1.0
    ):
        return np.broadcast_to(v, np.broadcast(u, v).shape).astype(float)
    if f is Family.NORMAL:
        return special.ndtr((special.ndtri(v) - th * special.ndtri(u)) / np.sqrt(1.0 - th * th))
    if f is Family.T:
        nu = c.df
        x, y = stats.t.ppf(u, nu), stats.t.ppf(v, nu)
        scale = np.sqrt((nu + x * x) * (1.0 - th * th) / (nu + 1.0))
        return stats.t.cdf((y - th * x) / scale, nu + 1.0)
    if f is Family.CLAYTON:
        s = np.expm1(-th * np.log(u)) + np.expm1(-th * np.log(v))
        return np.exp(-(th + 1.0) * np.log(u) - (1.0 / th + 1.0) * np.log1p(s))
    if f is Family.GUMBEL:
        x, y = -np.log(u), -np.log(v)
        a = x**th + y**th
        return np.exp(-(a ** (1.0 / th))) * a ** (1.0 / th - 1.0) * x ** (th - 1.0) / u
    if f is Family.FRANK:
        eu, ev, e1 = np.expm1(-th * u), np.expm1(-th * v), np.expm1(-th)
        return (eu + 1.0) * ev / (e1 + eu * ev)
    s = 1.0 + (th - 1.0) * (u + v)
    disc = s * s - 4.0 * th * (th - 1.0) * u * v
    return 0.5 - (1.0 + (th - 1.0) * u - (th + 1.0) * v) / (2.0 * np.sqrt(disc))


def h_inverse(c: FittedCopula, w, given):
    """Inverse of :func:`h_function` in ``v``: the conditional quantile."""
    u = np.asarray(given, dtype=float)
    w = np.asarray(w, dtype=float)
    u, w = np.broadcast_arrays(u, w)
    th, f = c.theta, c.family
    if f is Family.INDEPENDENCE or (f is Family.FRANK and th == 0.0) or (
        f is Family.PLACKETT and th == 1.0
    ):
        return w.astype(float, copy=True)
    if f is Family.NORMAL:
        return special.ndtr(th * special.ndtri(u) + np.sqrt(1.0 - th * th) * special.ndtri(w))
    if f is Family.T:
        nu = c.df
        x = stats.t.ppf(u, nu)
        scale = np.sqrt((nu + x * x) * (1.0 - th * th) / (nu + 1.0))
        return stats.t.cdf(th * x + scale * stats.t.ppf(w, nu + 1.0), nu)
    if f is Family.CLAYTON:
        term = np.expm1(-th / (1.0 + th) * np.log(w)) * np.exp(-th * np.log(u))
        return np.exp(-np.log1p(term) / th)
    if f is Family.FRANK:
        return -np.log1p(w * np.expm1(-th) / (w + (1.0 - w) * np.exp(-th * u))) / th
    if f is Family.GUMBEL:
        return _gumbel_h_inverse(th, u, w)
    # plackett, closed form (Johnson 1987)
    a = w * (1.0 - w)
    b = th + a * (th - 1.0) ** 2
    cc = 2.0 * a * (u * th * th + 1.0 - u) + th * (1.0 - 2.0 * a)
    d = np.sqrt(th) * np.sqrt(th + 4.0 * a * u * (1.0 - u) * (1.0 - th) ** 2)
    return (cc - (1.0 - 2.0 * w) * d) / (2.0 * b)


def _gumbel_h_inverse(th, u, w):
    # With x = -log u and z = (x^t + y^t)^(1/t) >= x, h(v|u) = w reduces to
    # g(z) = z + (t-1) log z = g(x) - log w. g is increasing and concave, so
    # Newton iterates started at z = x increase monotonically to the root.
    x = -np.log(u)
    if th == 1.0:
        return w.astype(float, copy=True)
    target = x + (th - 1.0) * np.log(x) - np.log(w)
    z = x.copy()
    for _ in range(100):
        g = z + (th - 1.0) * np.log(z) - target
        step = g / (1.0 + (th - 1.0) / z)
        z = z - step
        if np.all(np.abs(step) <= 1e-15 * np.maximum(z, 1.0)):
            break
    y = np.maximum(z**th - x**th, 0.0) ** (1.0 / th)
    return np.exp(-y)


# -- Kendall's tau -------------------------------------------------------------

_BERNOULLI_EVEN = special.bernoulli(40)[2::2]


def _debye1(x: float) -> float:
    """``D1(x) = (1/x) int_0^x t/(e^t - 1) dt`` via the dilogarithm."""
    if x == 0.0:
        return 1.0
    if x < 0.0:
        return _debye1(-x) - x / 2.0
    # int_0^x t/(e^t-1) dt = pi^2/6 + x log(1 - e^-x) - Li2(e^-x), Li2(z) = spence(1-z)
    em = -np.expm1(-x)
    return float(np.pi**2 / 6.0 + x * np.log(em) - special.spence(em)) / x


def _frank_tau(theta: float) -> float:
    if abs(theta) < 1.0:
        # tau = 4 sum_k B_2k theta^(2k-1) / ((2k+1)(2k)!), no cancellation near 0
        k = np.arange(1, _BERNOULLI_EVEN.size + 1)
        terms = _BERNOULLI_EVEN * theta ** (2 * k - 1) / ((2 * k + 1) * special.factorial(2 * k))
        return float(4.0 * np.sum(terms[::-1]))
    return 1.0 + 4.0 * (_debye1(theta) - 1.0) / theta


@lru_cache(maxsize=1)
def _plackett_rule(n: int = 96):
    # u-nodes on (0,1); for each u, separate Gauss-Legendre rules on [0,u] and
    # [u,1] so the ridge along the diagonal sits on a panel edge
    x, w = np.polynomial.legendre.leggauss(n)
    t, wt = (x + 1.0) / 2.0, w / 2.0
    u = t[:, None]
    v = np.concatenate([u * t[None, :], u + (1.0 - u) * t[None, :]], axis=1)
    wv = np.concatenate([u * wt[None, :], (1.0 - u) * wt[None, :]], axis=1)
    weight = wt[:, None] * wv
    uu = np.broadcast_to(u, v.shape)
    return uu.ravel(), v.ravel(), weight.ravel()


def _plackett_tau(theta: float) -> float:
    """tau = 1 - 4 E[dC/du dC/dv] over the unit square, by product quadrature."""
    if theta == 1.0:
        return 0.0
    u, v, w = _plackett_rule()
    s = 1.0 + (theta - 1.0) * (u + v)
    root = np.sqrt(s * s - 4.0 * theta * (theta - 1.0) * u * v)
    hu = 0.5 - (1.0 + (theta - 1.0) * u - (theta + 1.0) * v) / (2.0 * root)
    hv = 0.5 - (1.0 + (theta - 1.0) * v - (theta + 1.0) * u) / (2.0 * root)
    return float(1.0 - 4.0 * np.dot(w, hu * hv))


def param_to_tau(family, theta: float, df: float | None = None) -> float:
    """Kendall's tau implied by a family parameter."""
    fam = Family.parse(family)
    theta = float(theta)
    check_parameter(fam, theta)
    if fam is Family.INDEPENDENCE:
        return 0.0
    if fam.elliptical:
        return 2.0 / np.pi * np.arcsin(theta)
    if fam is Family.CLAYTON:
        return theta / (theta + 2.0)
    if fam is Family.GUMBEL:
        return 1.0 - 1.0 / theta
    if fam is Family.FRANK:
        return _frank_tau(theta)
    return _plackett_tau(theta)


def tau_range(family) -> tuple[float, float]:
    """Open interval of attainable tau values."""
    fam = Family.parse(family)
    if fam is Family.INDEPENDENCE:
        return 0.0, 0.0
    if fam in (Family.CLAYTON, Family.GUMBEL):
        return 0.0, 1.0
    return -1.0, 1.0


def _invert_monotone(f, tau, lo, hi):
    # expand the bracket until it straddles tau, then solve to full precision
    while f(hi) < tau:
        lo, hi = hi, hi * 2.0 if hi > 0 else hi / 2.0
        if abs(hi) > 1e8:
            raise TauOutOfRange(f"tau={tau} not attainable numerically")
    while f(lo) > tau:
        lo, hi = (lo * 2.0 if lo < 0 else lo / 2.0), lo
        if abs(lo) > 1e8 or 0 < abs(lo) < 1e-12:
            raise TauOutOfRange(f"tau={tau} not attainable numerically")
    return optimize.brentq(lambda t: f(t) - tau, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)


def tau_to_param(family, tau: float) -> float:
    """Family parameter with the given Kendall's tau.

    Frank and Plackett invert the tau map numerically. Tau zero maps to the
    independence limit (Frank 0, Plackett 1, Gumbel 1).
    """
    fam = Family.parse(family)
    tau = float(tau)
    lo, hi = tau_range(fam)
    if fam is Family.INDEPENDENCE:
        return 0.0
    if fam is Family.GUMBEL and tau == 0.0:
        return 1.0
    if not lo < tau < hi:
        raise TauOutOfRange(f"tau={tau} outside ({lo}, {hi}) for {fam.value}")
    if fam.elliptical:
        return float(np.sin(np.pi * tau / 2.0))
    if fam is Family.CLAYTON:
        return 2.0 * tau / (1.0 - tau)
    if fam is Family.GUMBEL:
        return 1.0 / (1.0 - tau)
    if tau == 0.0:
        return 0.0 if fam is Family.FRANK else 1.0
    if fam is Family.FRANK:
        f = lambda t: param_to_tau(fam, t)
        return _invert_monotone(f, tau, *((0.0, 10.0) if tau > 0 else (-10.0, 0.0)))
    # plackett: solve in log theta
    f = lambda z: _plackett_tau(float(np.exp(z)))
    return float(np.exp(_invert_monotone(f, tau, *((0.0, 4.0) if tau > 0 else (-4.0, 0.0)))))


# -- tail dependence and sampling -------------------------------------------

def lower_tail_dependence(c: FittedCopula) -> float:
    if c.family is Family.CLAYTON:
        return float(2.0 ** (-1.0 / c.theta))
    if c.family is Family.T:
        nu, r = c.df, c.theta
        return float(2.0 * stats.t.cdf(-np.sqrt((nu + 1.0) * (1.0 - r) / (1.0 + r)), nu + 1.0))
    return 0.0


def upper_tail_dependence(c: FittedCopula) -> float:
    if c.family is Family.GUMBEL:
        return float(2.0 - 2.0 ** (1.0 / c.theta))
    if c.family is Family.T:
        return lower_tail_dependence(c)
    return 0.0


def _open_uniform(rng: np.random.Generator, size) -> np.ndarray:
    # uniforms on the open interval (0, 1)
    return (rng.integers(0, 2**53, size=size, dtype=np.int64) + 0.5) / 2.0**53


def sample(c: FittedCopula, n: int, seed=None) -> np.ndarray:
    """Draw ``n`` pairs from the copula as an ``(n, 2)`` array.

    Elliptical families transform correlated normal (or t) vectors; the others
    invert the conditional distribution of the second margin given the first.
    ``seed`` is anything :func:`numpy.random.default_rng` accepts.
    """
    rng = np.random.default_rng(seed)
    n = int(n)
    if c.family.elliptical:
        z = rng.standard_normal((n, 2))
        r = c.theta
        z[:, 1] = r * z[:, 0] + np.sqrt(1.0 - r * r) * z[:, 1]
        if c.family is Family.NORMAL:
            uv = special.ndtr(z)
        else:
            w = rng.chisquare(c.df, size=n)
            uv = stats.t.cdf(z / np.sqrt(w / c.df)[:, None], c.df)
        return np.clip(uv, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))
    u = _open_uniform(rng, n)
    w = _open_uniform(rng, n)
    v = h_inverse(c, w, u)
    return np.column_stack([u, np.clip(v, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))])
