"""Seasonal ARIMA: specification, conditional-sum-of-squares fitting,
simulation and point forecasting.

Conventions follow Box-Jenkins with a plus-signed moving average::

    phi(L) Phi(L^s) (w_t - mu) = theta(L) Theta(L^s) a_t
    phi(L)   = 1 - phi_1 L - ... - phi_p L^p
    theta(L) = 1 + theta_1 L + ... + theta_q L^q
    w_t      = (1 - L)^d (1 - L^s)^D y_t

The mean ``mu`` is estimated only for undifferenced models. Estimation is
conditional: the first ``p + P*s`` differenced values are conditioned on and
innovations before them are taken as zero. Exact Gaussian likelihood
estimates (state-space based packages) can differ slightly for short series.
"""
from __future__ import annotations

import re
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize, signal, special

from .errors import InitialMismatch, InsufficientLength, NoConvergence
from .series import Series, add_months, difference, integrate_array

_SPEC_RE = re.compile(
    r"^\s*\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)"
    r"(?:\s*\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)\s*(?:\[\s*(\d+)\s*\]|_?\s*(\d+))?)?\s*$"
)


@dataclass(frozen=True)
class SarimaSpec:
    p: int = 0
    d: int = 0
    q: int = 0
    P: int = 0
    D: int = 0
    Q: int = 0
    s: int = 1

    def __post_init__(self):
        if min(self.p, self.d, self.q, self.P, self.D, self.Q) < 0:
            raise ValueError("orders must be non-negative")
        if (self.P, self.D, self.Q) != (0, 0, 0) and self.s < 2:
            raise ValueError("seasonal terms need a period s >= 2")
        if self.s < 1:
            raise ValueError("period must be positive")

    @classmethod
    def parse(cls, text: str) -> "SarimaSpec":
        """Parse ``(p,d,q)`` or ``(p,d,q)(P,D,Q)[s]``."""
        m = _SPEC_RE.match(text)
        if not m:
            raise ValueError(f"cannot parse model spec {text!r}")
        g = m.groups()
        p, d, q = int(g[0]), int(g[1]), int(g[2])
        if g[3] is None:
            return cls(p, d, q)
        period = g[6] or g[7]
        if period is None:
            raise ValueError(f"seasonal spec {text!r} needs a period, e.g. [12]")
        return cls(p, d, q, int(g[3]), int(g[4]), int(g[5]), int(period))

    def __str__(self) -> str:
        base = f"({self.p},{self.d},{self.q})"
        if (self.P, self.D, self.Q) == (0, 0, 0):
            return base
        return f"{base}({self.P},{self.D},{self.Q})[{self.s}]"

    @property
    def n_arma(self) -> int:
        return self.p + self.q + self.P + self.Q

    @property
    def n_cond(self) -> int:
        return self.p + self.P * self.s

    @property
    def n_diff(self) -> int:
        return self.d + self.D * self.s

    def param_names(self) -> list[str]:
        return (
            [f"ar{i}" for i in range(1, self.p + 1)]
            + [f"ma{i}" for i in range(1, self.q + 1)]
            + [f"sar{self.s * i}" for i in range(1, self.P + 1)]
            + [f"sma{self.s * i}" for i in range(1, self.Q + 1)]
        )


def _split(spec: SarimaSpec, beta: np.ndarray):
    i = 0
    ar = beta[i : i + spec.p]; i += spec.p
    ma = beta[i : i + spec.q]; i += spec.q
    sar = beta[i : i + spec.P]; i += spec.P
    sma = beta[i : i + spec.Q]; i += spec.Q
    return ar, ma, sar, sma


def lag_polynomials(spec: SarimaSpec, beta) -> tuple[np.ndarray, np.ndarray]:
    """Full AR and MA lag polynomials (ascending powers, leading 1).

    AR: ``(1 - sum phi_i L^i)(1 - sum Phi_j L^{js})``;
    MA: ``(1 + sum theta_i L^i)(1 + sum Theta_j L^{js})``.
    """
    ar, ma, sar, sma = _split(spec, np.asarray(beta, dtype=float))
    s = spec.s
    a = np.concatenate([[1.0], -ar])
    sa = np.zeros(spec.P * s + 1); sa[0] = 1.0; sa[s::s] = -sar
    b = np.concatenate([[1.0], ma])
    sb = np.zeros(spec.Q * s + 1); sb[0] = 1.0; sb[s::s] = sma
    return np.convolve(a, sa), np.convolve(b, sb)


def css_residuals(spec: SarimaSpec, beta, w: np.ndarray, mean: float = 0.0) -> np.ndarray:
    """Conditional innovations ``a_t`` for ``t >= p + P*s`` of the differenced series."""
    a_poly, b_poly = lag_polynomials(spec, beta)
    x = w - mean
    nc = a_poly.size - 1
    e = np.convolve(x, a_poly, mode="full")[nc : x.size]
    return signal.lfilter([1.0], b_poly, e)


def _min_root_modulus(poly: np.ndarray) -> float:
    # roots of 1 + c1 z + ... (ascending); inf when the polynomial is constant
    trimmed = np.trim_zeros(poly, "b")
    if trimmed.size <= 1:
        return float("inf")
    return float(np.min(np.abs(np.roots(trimmed[::-1]))))


@dataclass(frozen=True, eq=False)
class SarimaFit:
    spec: SarimaSpec
    names: tuple[str, ...]
    params: np.ndarray
    std_errors: np.ndarray
    t_values: np.ndarray
    p_values: np.ndarray
    sigma2: float
    residuals: Series
    objective: float
    series: Series
    mean: float = 0.0
    mean_se: float = float("nan")
    include_mean: bool = False
    ar_root_min: float = float("inf")
    ma_root_min: float = float("inf")
    converged: bool = True
    n_evals: int = 0

    @property
    def coefficients(self) -> dict[str, float]:
        return dict(zip(self.names, (float(x) for x in self.params)))

    @property
    def stationary(self) -> bool:
        return self.ar_root_min > 1.0

    @property
    def invertible(self) -> bool:
        return self.ma_root_min > 1.0

    @property
    def sigma(self) -> float:
        return float(np.sqrt(self.sigma2))

    def differenced(self) -> np.ndarray:
        return _difference_values(self.series, self.spec)

    def full_innovations(self) -> np.ndarray:
        """Innovations on the whole differenced grid, zero in the conditioning window."""
        return np.concatenate([np.zeros(self.spec.n_cond), self.residuals.values])


def _difference_values(s: Series, spec: SarimaSpec) -> np.ndarray:
    if spec.n_diff == 0:
        return np.asarray(s.values, dtype=float)
    return difference(s, spec.d, spec.D, spec.s if spec.D else 1).values


def _hannan_rissanen(spec: SarimaSpec, x: np.ndarray) -> np.ndarray | None:
    """Rough (phi, theta) from a long-AR residual regression; seasonal terms start at 0."""
    p, q = spec.p, spec.q
    beta = np.zeros(spec.n_arma)
    if p + q == 0:
        return None
    n = x.size
    m = min(max(p + q + 5, int(np.ceil(np.log(n) ** 2))), n // 3)
    if n - m < 2 * (p + q) + 10:
        return None
    lagged = np.column_stack([x[m - k : n - k] for k in range(1, m + 1)])
    coef, *_ = np.linalg.lstsq(lagged, x[m:], rcond=None)
    ehat = np.zeros(n)
    ehat[m:] = x[m:] - lagged @ coef
    start = m + max(p, q)
    cols = [x[start - k : n - k] for k in range(1, p + 1)]
    cols += [ehat[start - k : n - k] for k in range(1, q + 1)]
    z, *_ = np.linalg.lstsq(np.column_stack(cols), x[start:], rcond=None)
    beta[: p + q] = np.clip(z, -0.99, 0.99)
    return beta


def _numerical_hessian(f, x: np.ndarray) -> np.ndarray:
    k = x.size
    h = 1e-4 * np.maximum(np.abs(x), 0.1)
    H = np.empty((k, k))
    f0 = f(x)
    for i in range(k):
        ei = np.zeros(k); ei[i] = h[i]
        H[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / h[i] ** 2
        for j in range(i + 1, k):
            ej = np.zeros(k); ej[j] = h[j]
            H[i, j] = H[j, i] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4.0 * h[i] * h[j])
    return H


def fit_css(series: Series, spec: SarimaSpec | str, include_mean: bool | None = None,
            max_evals: int = 2000, tol: float = 1e-10, max_restarts: int = 6) -> SarimaFit:
    """Fit a seasonal ARIMA model by conditional sum of squares.

    Nelder-Mead simplex searches start from zero and from Hannan-Rissanen
    values; each search is restarted from its end point until the objective
    stops improving. Standard errors come from a finite-difference Hessian of
    the sum of squares, ``cov = 2 sigma^2 H^-1``.

    Raises
    ------
    InsufficientLength
        If the differenced series has no more than ``p + q + (P + Q) s + 10``
        points.
    NoConvergence
        If no search met the tolerance within its evaluation budget; the best
        parameter vector is attached as ``.best``.
    """
    if isinstance(spec, str):
        spec = SarimaSpec.parse(spec)
    if include_mean is None:
        include_mean = spec.n_diff == 0
    include_mean = bool(include_mean) and spec.n_diff == 0
    w = _difference_values(series, spec)
    need = spec.p + spec.q + (spec.P + spec.Q) * spec.s + 10
    if w.size <= need:
        raise InsufficientLength(f"differenced length {w.size} must exceed {need}")
    k = spec.n_arma + int(include_mean)
    wbar = float(w.mean())
    n_eff = w.size - spec.n_cond

    def unpack(theta):
        return (theta[: spec.n_arma], theta[spec.n_arma]) if include_mean else (theta, 0.0)

    def css(theta):
        beta, mu = unpack(theta)
        a = css_residuals(spec, beta, w, mu)
        val = float(np.dot(a, a))
        return val if np.isfinite(val) else 1e300

    starts = [np.zeros(spec.n_arma)]
    hr = _hannan_rissanen(spec, w - wbar)
    if hr is not None:
        starts.append(hr)
    if include_mean:
        starts = [np.append(s0, wbar) for s0 in starts]

    best_x, best_f, best_ok, evals = None, np.inf, False, 0
    if spec.n_arma == 0:
        # no ARMA terms: the minimizer is closed form (the sample mean, if any)
        best_x = np.array([wbar]) if include_mean else np.zeros(0)
        best_f, best_ok = css(best_x), True
    for x0 in starts if spec.n_arma else []:
        x, f_prev, ok = np.asarray(x0, dtype=float), np.inf, False
        for _ in range(max_restarts):
            res = optimize.minimize(
                css, x, method="Nelder-Mead",
                options={"maxfev": max_evals, "xatol": 1e-9, "fatol": tol, "adaptive": k > 3},
            )
            evals += res.nfev
            x, ok = res.x, bool(res.success)
            if f_prev - res.fun <= tol:
                break
            f_prev = res.fun
        if res.fun < best_f:
            best_x, best_f, best_ok = x, float(res.fun), ok
    if not best_ok:
        raise NoConvergence(f"CSS search for {spec} exhausted its budget", best=best_x)

    sigma2 = best_f / n_eff
    if k:
        H = _numerical_hessian(css, best_x)
        try:
            cov = 2.0 * sigma2 * np.linalg.inv(H)
            se = np.sqrt(np.where(np.diag(cov) >= 0, np.diag(cov), np.nan))
        except np.linalg.LinAlgError:
            se = np.full(k, np.nan)
    else:
        se = np.zeros(0)
    beta, mu = unpack(best_x)
    se_beta = se[: spec.n_arma]
    with np.errstate(divide="ignore", invalid="ignore"):
        tvals = beta / se_beta
    pvals = 2.0 * special.ndtr(-np.abs(tvals))

    a = css_residuals(spec, beta, w, mu)
    start = add_months(series.start, spec.n_diff + spec.n_cond)
    resid = Series(start=start, values=a, diff_spec=(spec.d, spec.D, spec.s if spec.D else 1),
                   name=f"{series.name}_residuals" if series.name else "residuals")
    a_poly, b_poly = lag_polynomials(spec, beta)
    ar_min, ma_min = _min_root_modulus(a_poly), _min_root_modulus(b_poly)
    for label, r in (("AR", ar_min), ("MA", ma_min)):
        if r <= 1.001:
            warnings.warn(f"{spec}: {label} polynomial has a root of modulus {r:.5f} <= 1.001",
                          RuntimeWarning, stacklevel=2)
    return SarimaFit(
        spec=spec,
        names=tuple(spec.param_names()),
        params=np.asarray(beta, dtype=float),
        std_errors=se_beta,
        t_values=tvals,
        p_values=pvals,
        sigma2=float(sigma2),
        residuals=resid,
        objective=float(best_f),
        series=series,
        mean=float(mu),
        mean_se=float(se[-1]) if include_mean else float("nan"),
        include_mean=include_mean,
        ar_root_min=ar_min,
        ma_root_min=ma_min,
        converged=best_ok,
        n_evals=evals,
    )


def make_fit(spec: SarimaSpec | str, params, series: Series, mean: float = 0.0,
             sigma2: float = 1.0) -> SarimaFit:
    """A fit with fixed, user-supplied coefficients (no estimation).

    Residuals are the CSS innovations of ``series`` under those coefficients.
    Useful for simulation studies and for hand-checked recursions.
    """
    if isinstance(spec, str):
        spec = SarimaSpec.parse(spec)
    params = np.asarray(params, dtype=float)
    if params.size != spec.n_arma:
        raise ValueError(f"{spec} needs {spec.n_arma} coefficients, got {params.size}")
    w = _difference_values(series, spec)
    a = css_residuals(spec, params, w, mean)
    start = add_months(series.start, spec.n_diff + spec.n_cond)
    resid = Series(start=start, values=a if a.size else [0.0],
                   diff_spec=(spec.d, spec.D, spec.s if spec.D else 1))
    if a.size == 0:
        raise InsufficientLength("series too short for the conditioning window")
    nan = np.full(spec.n_arma, np.nan)
    a_poly, b_poly = lag_polynomials(spec, params)
    return SarimaFit(spec, tuple(spec.param_names()), params, nan, nan, nan, float(sigma2),
                     resid, float(np.dot(a, a)), series, float(mean), float("nan"),
                     spec.n_diff == 0 and mean != 0.0,
                     _min_root_modulus(a_poly), _min_root_modulus(b_poly))


# -- recursion ------------------------------------------------------------------

def _run_recursion(fit: SarimaFit, x_hist: np.ndarray, a_hist: np.ndarray, innov: np.ndarray) -> np.ndarray:
    """Extend the mean-adjusted differenced process with new innovations.

    ``innov`` is (paths, h). ``x_hist``/``a_hist`` hold past values (1-D,
    oldest first). Returns the new mean-adjusted differenced values.
    """
    a_poly, b_poly = lag_polynomials(fit.spec, fit.params)
    ar = -a_poly[1:]            # x_t = sum ar_k x_{t-k} + ...
    ma = b_poly[1:]             # ... + a_t + sum ma_j a_{t-j}
    npaths, h = innov.shape
    nx, na = ar.size, ma.size
    x = np.zeros((npaths, nx + h))
    a = np.zeros((npaths, na + h))
    if nx:
        tail = x_hist[-nx:] if x_hist.size else np.zeros(0)
        x[:, nx - tail.size : nx] = tail
    if na:
        tail = a_hist[-na:] if a_hist.size else np.zeros(0)
        a[:, na - tail.size : na] = tail
    a[:, na:] = innov
    for t in range(h):
        val = a[:, na + t].copy()
        if nx:
            val += x[:, t : t + nx] @ ar[::-1]
        if na:
            val += a[:, t : t + na] @ ma[::-1]
        x[:, nx + t] = val
    return x[:, nx:]


def simulate_paths(fit: SarimaFit, innovations) -> np.ndarray:
    """Continue the fitted model past the end of its training data.

    ``innovations`` has shape (paths, h) or (h,). Returns levels on the
    modeled scale with the same shape.
    """
    innov = np.asarray(innovations, dtype=float)
    flat = innov.ndim == 1
    innov = np.atleast_2d(innov)
    if not np.all(np.isfinite(innov)):
        raise ValueError("innovations must be finite")
    w = fit.differenced()
    x_new = _run_recursion(fit, w - fit.mean, fit.full_innovations(), innov)
    spec = fit.spec
    nd = spec.n_diff
    if nd:
        init = np.asarray(fit.series.values[-nd:], dtype=float)
        levels = integrate_array(x_new + fit.mean, init, spec.d, spec.D, spec.s if spec.D else 1)[:, nd:]
    else:
        levels = x_new + fit.mean
    return levels[0] if flat else levels


def simulate(fit: SarimaFit, innovations, initial=None) -> Series:
    """Drive the fitted recursion with the given innovations.

    With ``initial=None`` the path continues from the end of the training
    series (past residuals included) and the returned series covers only the
    new months. Otherwise ``initial`` must hold the first
    ``d + D*s + p + P*s`` levels; innovations before the conditioning window
    are zero, and the returned series is ``initial`` followed by the
    simulated levels, dated from the training start. Feeding the fit's own
    residuals this way reproduces the training series.
    """
    innov = np.asarray(innovations, dtype=float).reshape(-1)
    spec = fit.spec
    if initial is None:
        levels = simulate_paths(fit, innov)
        return Series(start=add_months(fit.series.end, 1), values=levels,
                      transform_log=fit.series.transform_log, name=fit.series.name)
    initial = np.asarray(initial, dtype=float).reshape(-1)
    m = spec.n_diff + spec.n_cond
    if initial.size != m:
        raise InitialMismatch(f"{spec} needs {m} initial levels, got {initial.size}")
    w0 = initial
    period = spec.s if spec.D else 1
    if spec.n_diff:
        for _ in range(spec.d):
            w0 = np.diff(w0)
        for _ in range(spec.D):
            w0 = w0[period:] - w0[:-period]
    x_new = _run_recursion(fit, w0 - fit.mean, np.zeros(0), innov[None, :])[0]
    if spec.n_diff:
        levels = integrate_array(
            np.concatenate([w0, x_new + fit.mean]), initial[: spec.n_diff], spec.d, spec.D, period
        )
    else:
        levels = np.concatenate([initial, x_new + fit.mean])
    return Series(start=fit.series.start, values=levels, transform_log=fit.series.transform_log,
                  name=fit.series.name)


def forecast_point(fit: SarimaFit, horizon: int) -> np.ndarray:
    """Point forecasts on the modeled scale: the recursion with zero future shocks."""
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    return simulate_paths(fit, np.zeros(horizon))


def coefficient_table(fit: SarimaFit) -> list[dict]:
    """Rows of (parameter, coefficient, se, t_value, p_value) in AR, MA, SAR, SMA order.

    An estimated mean is appended as an ``intercept`` row.
    """
    rows = [
        {"parameter": name, "coefficient": float(c), "se": float(se),
         "t_value": float(t), "p_value": float(p)}
        for name, c, se, t, p in zip(fit.names, fit.params, fit.std_errors, fit.t_values, fit.p_values)
    ]
    if fit.include_mean:
        se = fit.mean_se
        t = fit.mean / se if se and np.isfinite(se) else float("nan")
        rows.append({"parameter": "intercept", "coefficient": fit.mean, "se": se, "t_value": t,
                     "p_value": float(2.0 * special.ndtr(-abs(t))) if np.isfinite(t) else float("nan")})
    return rows
