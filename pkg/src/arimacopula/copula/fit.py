"""Copula parameter estimation on pseudo-observations."""
from __future__ import annotations

import numpy as np
from scipy import optimize

from ..errors import FamilyIncompatible, NoConvergence, TauOutOfRange
from .families import DEFAULT_T_DF, Family, FittedCopula, log_density, tau_to_param
from .rank import kendall_tau

# maps between the family parameter and an unconstrained search coordinate
_TO_Z = {
    Family.NORMAL: np.arctanh,
    Family.T: np.arctanh,
    Family.CLAYTON: np.log,
    Family.GUMBEL: lambda t: np.log(t - 1.0),
    Family.FRANK: lambda t: t,
    Family.PLACKETT: np.log,
}
_FROM_Z = {
    Family.NORMAL: np.tanh,
    Family.T: np.tanh,
    Family.CLAYTON: np.exp,
    Family.GUMBEL: lambda z: 1.0 + np.exp(z),
    Family.FRANK: lambda z: z,
    Family.PLACKETT: np.exp,
}
_Z_LIMITS = {
    Family.NORMAL: (-4.0, 4.0),
    Family.T: (-4.0, 4.0),
    Family.CLAYTON: (-20.0, 5.0),
    Family.GUMBEL: (-20.0, 5.0),
    Family.FRANK: (-150.0, 150.0),
    Family.PLACKETT: (-12.0, 12.0),
}


def _check_sample(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.ndim != 2 or u.shape[1] != 2:
        raise ValueError("copula fitting needs an (n, 2) pseudo-sample")
    if u.shape[0] < 10:
        raise ValueError(f"need at least 10 observations, got {u.shape[0]}")
    return u


def tau_inversion_param(family: Family, tau: float, clamp: bool = False) -> float:
    """Parameter from a sample tau.

    With ``clamp`` a tau outside the family's range is moved to the nearest
    attainable value instead of raising; bootstrap refits rely on this.
    """
    try:
        return tau_to_param(family, tau)
    except TauOutOfRange:
        if not clamp:
            raise FamilyIncompatible(
                f"sample tau {tau:.4f} is not attainable by the {family.value} family"
            ) from None
    if family is Family.CLAYTON and tau <= 0:
        return tau_to_param(family, 1e-10)
    if family is Family.GUMBEL and tau < 0:
        return 1.0
    edge = 1.0 - 1e-9
    return tau_to_param(family, float(np.clip(tau, -edge, edge)))


def fit_copula(u, family, method: str = "tau_inversion", df: float | None = None,
               clamp: bool = False) -> FittedCopula:
    """Fit a one-parameter copula to an ``(n, 2)`` pseudo-sample.

    ``tau_inversion`` maps the sample Kendall's tau through the family's tau
    relation. ``pseudo_mle`` maximizes the copula log-likelihood with a bounded
    one-dimensional search around the tau-inversion value. The t family's
    ``df`` is fixed (default 25), never estimated.
    """
    fam = Family.parse(family)
    u = _check_sample(u)
    if fam is Family.T and df is None:
        df = DEFAULT_T_DF
    if fam is Family.INDEPENDENCE:
        return FittedCopula(fam, 0.0, None, "fixed")
    tau, _ = kendall_tau(u[:, 0], u[:, 1])
    theta0 = tau_inversion_param(fam, tau, clamp=clamp)
    if method == "tau_inversion":
        return FittedCopula(fam, theta0, df, "tau_inversion")
    if method != "pseudo_mle":
        raise ValueError(f"unknown fit method {method!r}")

    to_z, from_z = _TO_Z[fam], _FROM_Z[fam]
    lo, hi = _Z_LIMITS[fam]
    with np.errstate(divide="ignore"):
        z0 = float(np.clip(to_z(theta0), lo, hi))

    def nll(z):
        c = FittedCopula(fam, float(from_z(z)), df, "pseudo_mle")
        val = -np.sum(log_density(c, u[:, 0], u[:, 1]))
        return val if np.isfinite(val) else 1e300

    a, b = max(lo, z0 - 4.0), min(hi, z0 + 4.0)
    res = optimize.minimize_scalar(nll, bounds=(a, b), method="bounded",
                                   options={"xatol": 1e-10, "maxiter": 500})
    if not res.success:
        raise NoConvergence(f"pseudo-MLE for {fam.value} did not converge", best=from_z(res.x))
    theta = float(from_z(res.x))
    if fam is Family.GUMBEL:
        theta = max(theta, 1.0)
    return FittedCopula(fam, theta, df, "pseudo_mle")
