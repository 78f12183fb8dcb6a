"""Synthetic data with known ground truth: SARIMA paths, copula-coupled
innovations and a complete demo dataset for the command-line pipeline."""
from __future__ import annotations

import configparser
from pathlib import Path

import numpy as np
from scipy import signal, special

from .copula import FittedCopula, sample
from .sarima import SarimaSpec, lag_polynomials
from .series import add_months, integrate_array

# coefficients and scales used by the bundled demo
DEMO_TARGET = ("(0,2,2)", (0.2565, 0.6380), 0.01, 9.0)
DEMO_DRIVER = ("(1,1,0)(1,0,1)[11]", (0.2061, 0.8768, 0.7346), 0.094, 3.0)
DEMO_THIRD = ("(0,2,1)", (0.9999,), 0.04, 5.5)
DEMO_COPULA = FittedCopula("clayton", 2.0)
# the third series' innovations load on the driver's, not on the target's
DEMO_THIRD_LOADING = 0.8


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def arma_filter(spec: SarimaSpec | str, params, innovations, mean: float = 0.0) -> np.ndarray:
    """Differenced-scale ARMA output for the given innovations, zero pre-sample state."""
    if isinstance(spec, str):
        spec = SarimaSpec.parse(spec)
    a_poly, b_poly = lag_polynomials(spec, params)
    return signal.lfilter(b_poly, a_poly, np.asarray(innovations, dtype=float)) + mean


def integrate_levels(spec: SarimaSpec, w: np.ndarray, start_level: float) -> np.ndarray:
    """Integrate a differenced path from flat initial levels equal to ``start_level``."""
    nd = spec.n_diff
    if nd == 0:
        return np.asarray(w, dtype=float)
    init = np.full(nd, float(start_level))
    return integrate_array(w, init, spec.d, spec.D, spec.s if spec.D else 1)


def simulate_sarima(spec: SarimaSpec | str, params, n: int, sigma: float = 1.0, seed=None,
                    start_level: float = 0.0, burn: int = 200, innovations=None,
                    mean: float = 0.0) -> np.ndarray:
    """Simulate ``n`` levels of a seasonal ARIMA process.

    Gaussian innovations (or the supplied ones, of length ``n - d - D*s + burn``)
    pass through the ARMA filter; the first ``burn`` differenced values are
    discarded before integrating.
    """
    if isinstance(spec, str):
        spec = SarimaSpec.parse(spec)
    m = n - spec.n_diff
    if m < 1:
        raise ValueError("n too small for the differencing order")
    if innovations is None:
        innovations = sigma * _as_rng(seed).standard_normal(m + burn)
    innovations = np.asarray(innovations, dtype=float)
    if innovations.size != m + burn:
        raise ValueError(f"need {m + burn} innovations, got {innovations.size}")
    w = arma_filter(spec, params, innovations, mean)[burn:]
    return integrate_levels(spec, w, start_level)


def coupled_innovations(copula: FittedCopula, n: int, sigma_target: float, sigma_driver: float,
                        seed=None) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian innovation pairs whose dependence is the given copula."""
    u = sample(copula, n, _as_rng(seed))
    z = special.ndtri(u)
    return sigma_target * z[:, 0], sigma_driver * z[:, 1]


def _daily_records(monthly: np.ndarray, start: tuple[int, int], rng: np.random.Generator,
                   jitter: float) -> list[tuple[str, float]]:
    # five trading days per month whose average is the monthly value
    records = []
    days = (3, 9, 15, 21, 27)
    for i, value in enumerate(monthly):
        y, mth = add_months(start, i)
        noise = rng.normal(0.0, jitter, len(days))
        noise -= noise.mean()
        vals = value * (1.0 + noise)
        for day, v in zip(days, vals):
            records.append((f"{y:04d}-{mth:02d}-{day:02d}", float(v)))
    return records


def make_demo_dataset(out_dir, seed: int = 2011, n_months: int = 162,
                      start: tuple[int, int] = (1998, 1)) -> Path:
    """Write a demo dataset (daily CSVs for three series) plus a config.

    The target ("stock") and driver ("oil") have Clayton-coupled Gaussian
    innovations; the third series ("gold") has innovations correlated with
    the driver's only. Files hold ``exp`` of the simulated log levels, spread
    over five trading days per month. Returns the config path.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    burn = 120
    t_spec, t_par, t_sig, t_lvl = DEMO_TARGET
    d_spec, d_par, d_sig, d_lvl = DEMO_DRIVER
    ts, ds = SarimaSpec.parse(t_spec), SarimaSpec.parse(d_spec)
    m = n_months + burn
    e_t, e_d = coupled_innovations(DEMO_COPULA, m, t_sig, d_sig, rng)
    target = simulate_sarima(ts, t_par, n_months, innovations=e_t[ts.n_diff:],
                             burn=burn, start_level=t_lvl)
    driver = simulate_sarima(ds, d_par, n_months, innovations=e_d[ds.n_diff:],
                             burn=burn, start_level=d_lvl)
    g_spec, g_par, g_sig, g_lvl = DEMO_THIRD
    gs = SarimaSpec.parse(g_spec)
    rho = DEMO_THIRD_LOADING
    e_g = g_sig * (rho * e_d / d_sig + np.sqrt(1.0 - rho * rho) * rng.standard_normal(m))
    third = simulate_sarima(gs, g_par, n_months, innovations=e_g[gs.n_diff:],
                            burn=burn, start_level=g_lvl)
    for name, levels in (("stock", target), ("oil", driver), ("gold", third)):
        recs = _daily_records(np.exp(levels), start, rng, 0.01)
        with open(out / f"{name}.csv", "w", newline="") as fh:
            fh.write("date,value\n")
            for date, value in recs:
                fh.write(f"{date},{value!r}\n")
    cfg = configparser.ConfigParser()
    cutoff = add_months(start, n_months - 7)
    cfg["pipeline"] = {
        "target": "stock",
        "driver": "oil",
        "families": "clayton,gumbel,frank,normal,t,plackett",
        "n_boot": "200",
        "horizon": "12",
        "n_sims": "20000",
        "seed": str(seed),
        "cutoff": f"{cutoff[0]:04d}-{cutoff[1]:02d}",
    }
    cfg["series.stock"] = {"path": "stock.csv", "log": "true", "spec": t_spec}
    cfg["series.oil"] = {"path": "oil.csv", "log": "true", "spec": d_spec}
    cfg["series.gold"] = {"path": "gold.csv", "log": "true", "spec": g_spec}
    path = out / "pipeline.ini"
    with open(path, "w") as fh:
        cfg.write(fh)
    return path
