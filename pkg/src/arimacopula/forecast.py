"""Coupled SARIMA forecasting through a residual copula.

A :class:`CoupledModel` pairs a target and a driver fit with a copula on
their residual pseudo-observations. Forecast densities are Monte Carlo:
each path draws one copula pair per month, maps the target coordinate to a
Gaussian innovation ``sigma * Phi^-1(u)`` and runs the target recursion.

Two modes exist. By default nothing about the driver's future is known, so
the copula only shapes the joint law of the innovations. With
``driver_innovations`` supplied (for instance the driver's realized one-step
errors over a test window), the target coordinate is drawn from its
conditional law given the driver's ranks.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import special

from .copula import Family, FittedCopula, fit_copula, h_inverse, pseudo_observations, sample
from .errors import CutoffOutOfRange, EmptyInput, InsufficientOverlap, LengthMismatch
from .gof import derive_seeds
from .sarima import SarimaFit, _difference_values, css_residuals, simulate_paths
from .series import YearMonth, Series, add_months, format_month, months_between

MIN_OVERLAP = 30
MIN_SIMS = 1000
BLOCK_SIZE = 5000


@dataclass(frozen=True, eq=False)
class CoupledModel:
    target_fit: SarimaFit
    driver_fit: SarimaFit
    copula: FittedCopula
    sigma_target: float
    sigma_driver: float
    overlap_start: YearMonth = (1, 1)
    n_overlap: int = 0

    def __post_init__(self):
        if not (self.sigma_target > 0 and self.sigma_driver > 0):
            raise ValueError("residual sigmas must be positive")

    def with_sigmas(self, sigma_target: float | None = None, sigma_driver: float | None = None):
        return CoupledModel(self.target_fit, self.driver_fit, self.copula,
                            self.sigma_target if sigma_target is None else sigma_target,
                            self.sigma_driver if sigma_driver is None else sigma_driver,
                            self.overlap_start, self.n_overlap)


@dataclass(frozen=True, eq=False)
class ForecastDistribution:
    """Per-horizon Monte Carlo samples, shape ``(n_sims, horizon)``."""

    samples: np.ndarray
    origin: YearMonth

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        if s.ndim != 2:
            raise ValueError("samples must be (n_sims, horizon)")
        if s.shape[0] < MIN_SIMS:
            raise ValueError(f"need at least {MIN_SIMS} simulations")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def horizon_months(self) -> int:
        return self.samples.shape[1]

    @property
    def n_sims(self) -> int:
        return self.samples.shape[0]

    def months(self) -> list[YearMonth]:
        return [add_months(self.origin, h) for h in range(1, self.horizon_months + 1)]

    def sorted_samples(self) -> np.ndarray:
        return np.sort(self.samples, axis=0)


@dataclass(frozen=True)
class ValidationReport:
    model_name: str
    mse: float
    horizon: int
    months: tuple[str, ...]
    predicted: tuple[float, ...]
    actual: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "model_name": self.model_name,
            "mse": self.mse,
            "horizon": self.horizon,
            "pairs": [
                {"month": m, "predicted": p, "actual": a}
                for m, p, a in zip(self.months, self.predicted, self.actual)
            ],
        }


def _align(a: Series, b: Series) -> tuple[np.ndarray, np.ndarray, YearMonth]:
    first = max(a.start, b.start)
    last = min(a.end, b.end)
    n = months_between(first, last) + 1
    if n <= 0:
        return np.zeros(0), np.zeros(0), first
    ia, ib = months_between(a.start, first), months_between(b.start, first)
    return a.values[ia : ia + n], b.values[ib : ib + n], first


def couple(target: SarimaFit, driver: SarimaFit, family, method: str = "tau_inversion",
           df: float | None = None) -> CoupledModel:
    """Fit a copula to the month-aligned residuals of two SARIMA fits.

    The target is the first copula coordinate. Sigmas are sample standard
    deviations of the aligned residuals.

    Raises
    ------
    InsufficientOverlap
        Fewer than 30 common months.
    """
    rt, rd, first = _align(target.residuals, driver.residuals)
    if rt.size < MIN_OVERLAP:
        raise InsufficientOverlap(f"residuals share {rt.size} months; need {MIN_OVERLAP}")
    u = pseudo_observations(np.column_stack([rt, rd]))
    cop = fit_copula(u, Family.parse(family), method=method, df=df)
    return CoupledModel(target, driver, cop, float(np.std(rt, ddof=1)), float(np.std(rd, ddof=1)),
                        first, int(rt.size))


def joint_innovations(model: CoupledModel, n: int, seed=None) -> np.ndarray:
    """``n`` one-step innovation pairs (target, driver) from the coupled model."""
    u = sample(model.copula, n, seed)
    z = special.ndtri(u)
    return np.column_stack([model.sigma_target * z[:, 0], model.sigma_driver * z[:, 1]])


def _simulate_block(model: CoupledModel, horizon: int, n: int, seed, v_given) -> np.ndarray:
    rng = np.random.default_rng(seed)
    if v_given is None:
        u = sample(model.copula, n * horizon, rng)[:, 0].reshape(n, horizon)
    else:
        w = rng.random((n, horizon))
        w = np.clip(w, 1e-300, 1.0 - 2.0 ** -53)
        # all supported families are exchangeable: C(u | v) uses the same h-inverse
        u = h_inverse(model.copula, w, np.broadcast_to(v_given, (n, horizon)))
        u = np.clip(u, 1e-300, 1.0 - 2.0 ** -53)
    innov = model.sigma_target * special.ndtri(u)
    return simulate_paths(model.target_fit, innov)


def forecast_joint(model: CoupledModel, horizon: int, n_sims: int = 20000, seed: int = 0,
                   driver_innovations=None, n_jobs: int = 1) -> ForecastDistribution:
    """Monte Carlo predictive distribution of the target on the modeled scale.

    Simulations run in blocks of 5000; block ``i`` is seeded with child ``i``
    of ``SeedSequence(seed)``, so the output depends only on ``seed`` and
    ``n_sims``, not on ``n_jobs``.

    Parameters
    ----------
    driver_innovations : array of length ``horizon``, optional
        Known driver innovations. When given, each month's target innovation
        is drawn from the copula conditional on the driver's rank
        ``Phi(e / sigma_driver)``.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if n_sims < MIN_SIMS:
        raise ValueError(f"n_sims must be at least {MIN_SIMS}")
    v_given = None
    if driver_innovations is not None:
        e = np.asarray(driver_innovations, dtype=float).reshape(-1)
        if e.size != horizon:
            raise LengthMismatch(f"{e.size} driver innovations for horizon {horizon}")
        v_given = np.clip(special.ndtr(e / model.sigma_driver), 1e-300, 1.0 - 2.0 ** -53)
    sizes = [BLOCK_SIZE] * (n_sims // BLOCK_SIZE)
    if n_sims % BLOCK_SIZE:
        sizes.append(n_sims % BLOCK_SIZE)
    seeds = derive_seeds(seed, len(sizes))
    args = [(model, horizon, k, ss, v_given) for k, ss in zip(sizes, seeds)]
    if n_jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            blocks = list(ex.map(_simulate_block, *zip(*args)))
    else:
        blocks = [_simulate_block(*a) for a in args]
    return ForecastDistribution(np.vstack(blocks), model.target_fit.series.end)


def point_forecast(dist: ForecastDistribution, estimator: str = "median") -> np.ndarray:
    """Per-horizon median (default) or mean of the samples."""
    if estimator == "median":
        return np.median(dist.sorted_samples(), axis=0)
    if estimator == "mean":
        return dist.samples.mean(axis=0)
    raise ValueError(f"unknown estimator {estimator!r}; use 'median' or 'mean'")


def prediction_interval(dist: ForecastDistribution, level: float = 0.95) -> tuple[np.ndarray, np.ndarray]:
    """Equal-tailed empirical quantiles ``(1 - level)/2`` and ``(1 + level)/2``."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    s = dist.sorted_samples()
    lo = np.quantile(s, (1.0 - level) / 2.0, axis=0)
    hi = np.quantile(s, (1.0 + level) / 2.0, axis=0)
    return lo, hi


def density_histogram(dist: ForecastDistribution, bins: int = 100) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per-horizon ``(edges, counts)`` histograms of the samples."""
    out = []
    for col in dist.sorted_samples().T:
        counts, edges = np.histogram(col, bins=bins)
        out.append((edges, counts))
    return out


def split_train_test(s: Series, cutoff: YearMonth) -> tuple[Series, Series]:
    """Training part through ``cutoff`` inclusive, test part after it.

    Raises
    ------
    CutoffOutOfRange
        Unless ``s.start <= cutoff < s.end``.
    """
    k = months_between(s.start, tuple(cutoff))
    if k < 0 or k >= len(s) - 1:
        raise CutoffOutOfRange(
            f"cutoff {format_month(tuple(cutoff))} must lie in "
            f"[{format_month(s.start)}, {format_month(s.end)})"
        )
    return (s.with_values(s.values[: k + 1]),
            s.with_values(s.values[k + 1 :], start=add_months(s.start, k + 1)))


def mse(actual, predicted) -> float:
    """Mean squared difference of two equal-length sequences."""
    a = np.asarray(actual, dtype=float).reshape(-1)
    p = np.asarray(predicted, dtype=float).reshape(-1)
    if a.size != p.size:
        raise LengthMismatch(f"lengths differ: {a.size} vs {p.size}")
    if a.size == 0:
        raise EmptyInput("nothing to compare")
    return float(np.mean((a - p) ** 2))


def validation_report(name: str, test: Series, predicted) -> ValidationReport:
    predicted = np.asarray(predicted, dtype=float)[: len(test)]
    return ValidationReport(
        model_name=name,
        mse=mse(test.values, predicted),
        horizon=len(test),
        months=tuple(format_month(m) for m in test.months()),
        predicted=tuple(float(x) for x in predicted),
        actual=tuple(float(x) for x in test.values),
    )


def driver_test_innovations(driver_fit: SarimaFit, driver_full: Series, horizon: int) -> np.ndarray:
    """One-step errors of the driver's fitted recursion over the months after training.

    The training-sample coefficients filter the full driver series; the
    residuals for the ``horizon`` months after the training end are returned.
    """
    if driver_full.start != driver_fit.series.start:
        raise ValueError("driver series must start where the driver fit's training data starts")
    window = driver_full.window(driver_full.start, add_months(driver_fit.series.end, horizon))
    a = css_residuals(driver_fit.spec, driver_fit.params,
                      _difference_values(window, driver_fit.spec), driver_fit.mean)
    return a[-horizon:]
