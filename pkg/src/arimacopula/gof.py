"""Copula goodness of fit and independence testing.

The Cramer-von Mises statistic compares the empirical copula with the fitted
parametric copula at the pseudo-observations themselves::

    S_n = sum_i ( C_n(U_i) - C_theta(U_i) )^2,   C_n(x) = (1/n) #{j : U_j <= x}

p-values come from a parametric bootstrap (goodness of fit) or from
within-column permutations (independence).
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .copula import Family, FittedCopula, copula_cdf, fit_copula, pseudo_observations, sample
from .diagnostics import TestResult


@dataclass(frozen=True)
class GofResult:
    family: str
    theta_hat: float
    s_n: float
    p_value: float
    n_bootstrap: int
    seed: int
    df: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _empirical_at(u: np.ndarray, points: np.ndarray, chunk: int = 2048) -> np.ndarray:
    """Empirical copula of sample ``u`` (n, k) at ``points`` (m, k)."""
    n = u.shape[0]
    out = np.empty(points.shape[0])
    for start in range(0, points.shape[0], chunk):
        p = points[start : start + chunk]
        below = np.all(u[None, :, :] <= p[:, None, :], axis=2)
        out[start : start + chunk] = below.sum(axis=1) / n
    return out


def empirical_copula(u, point) -> float | np.ndarray:
    """``C_n(point)``: share of pseudo-observations componentwise below ``point``.

    ``point`` may be a single point or an ``(m, k)`` array of points.
    """
    u = np.asarray(u, dtype=float)
    p = np.asarray(point, dtype=float)
    single = p.ndim == 1
    vals = _empirical_at(u, np.atleast_2d(p))
    return float(vals[0]) if single else vals


def cvm_statistic(u, copula: FittedCopula | Callable) -> float:
    """Cramer-von Mises distance between the empirical and a parametric copula.

    ``copula`` is a :class:`FittedCopula` or any callable ``C(u, v)``.
    """
    u = np.asarray(u, dtype=float)
    if u.shape[0] < 2:
        raise ValueError("need at least two observations")
    emp = _empirical_at(u, u)
    if isinstance(copula, FittedCopula):
        par = copula_cdf(copula, u[:, 0], u[:, 1])
    else:
        par = np.asarray(copula(u[:, 0], u[:, 1]), dtype=float)
    return float(np.sum((emp - par) ** 2))


def derive_seeds(seed: int, n: int) -> list[np.random.SeedSequence]:
    """Independent child seed sequences ``SeedSequence(seed).spawn(n)``.

    Task ``i`` always receives child ``i``, so results do not depend on how
    tasks are scheduled.
    """
    return np.random.SeedSequence(int(seed)).spawn(int(n))


def _bootstrap_stats(fitted: FittedCopula, n: int, seeds, method: str) -> np.ndarray:
    out = np.empty(len(seeds))
    for i, ss in enumerate(seeds):
        star = pseudo_observations(sample(fitted, n, ss))
        refit = fit_copula(star, fitted.family, method=method, df=fitted.df, clamp=True)
        out[i] = cvm_statistic(star, refit)
    return out


def gof_bootstrap(u, family, n_boot: int = 1000, seed: int = 0, method: str = "tau_inversion",
                  df: float | None = None, n_jobs: int = 1) -> GofResult:
    """Parametric-bootstrap goodness-of-fit test for one copula family.

    Fits the family on ``u``, computes ``S_n``, then for each replicate samples
    ``n`` points from the fitted copula, re-ranks, refits and recomputes the
    statistic. ``p = (1 + #{S* >= S_n}) / (n_boot + 1)``.
    """
    if n_boot < 100:
        raise ValueError("n_boot must be at least 100")
    u = pseudo_observations(np.asarray(u, dtype=float))
    fam = Family.parse(family)
    fitted = fit_copula(u, fam, method=method, df=df)
    s_n = cvm_statistic(u, fitted)
    seeds = derive_seeds(seed, n_boot)
    n = u.shape[0]
    if n_jobs > 1:
        chunks = np.array_split(np.arange(n_boot), n_jobs)
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            parts = ex.map(_bootstrap_stats, [fitted] * len(chunks), [n] * len(chunks),
                           [[seeds[i] for i in c] for c in chunks], [method] * len(chunks))
            stats_star = np.concatenate(list(parts))
    else:
        stats_star = _bootstrap_stats(fitted, n, seeds, method)
    p = (1.0 + np.count_nonzero(stats_star >= s_n)) / (n_boot + 1.0)
    return GofResult(fam.value, fitted.theta, s_n, float(p), int(n_boot), int(seed), fitted.df)


def _independence_stat(u: np.ndarray) -> float:
    emp = _empirical_at(u, u)
    return float(np.sum((emp - np.prod(u, axis=1)) ** 2))


def independence_test_multivariate(data, n_perm: int = 1000, seed: int = 0) -> TestResult:
    """Permutation test of mutual independence of the columns of ``data``.

    The statistic is the Cramer-von Mises distance between the empirical
    copula and the product copula at the pseudo-observations. Under the null
    every within-column permutation is equally likely, so columns 2..k are
    shuffled independently to build the reference distribution. This is a
    global test: it also detects dependence that is invisible pairwise.
    """
    u = pseudo_observations(np.asarray(data, dtype=float))
    n, k = u.shape
    if k < 2:
        raise ValueError("need at least two columns")
    if n_perm < 100:
        raise ValueError("n_perm must be at least 100")
    t_obs = _independence_stat(u)
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    count = 0
    perm = u.copy()
    for _ in range(n_perm):
        for j in range(1, k):
            perm[:, j] = u[rng.permutation(n), j]
        if _independence_stat(perm) >= t_obs:
            count += 1
    p = (1.0 + count) / (n_perm + 1.0)
    return TestResult(t_obs, float(p), n, "CvM independence (permutation)")
