"""Lossless JSON/CSV persistence for fits, copulas and pipeline tables.

Floats are written with ``repr`` (shortest round-tripping decimal), so every
value read back is bit-identical to the one written. Non-finite numbers are
encoded as the strings ``"nan"``, ``"inf"`` and ``"-inf"`` to keep the JSON
standard.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .copula import FittedCopula
from .forecast import CoupledModel, ForecastDistribution, density_histogram, point_forecast, prediction_interval
from .sarima import SarimaFit, SarimaSpec
from .series import Series, format_month, parse_month


def encode_float(x) -> float | str:
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def decode_float(x) -> float:
    return float(x)


def fmt(x) -> str:
    """Full-precision text for a CSV cell."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(c) for c in r])
    return path


def read_rows(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def dump_json(obj, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n")
    return path


def load_json(path):
    return json.loads(Path(path).read_text())


# -- series -----------------------------------------------------------------------

def series_to_dict(s: Series) -> dict:
    return {
        "start": format_month(s.start),
        "values": [float(v) for v in s.values],
        "transform_log": s.transform_log,
        "diff_spec": list(s.diff_spec),
        "name": s.name,
    }


def series_from_dict(d: dict) -> Series:
    return Series(start=parse_month(d["start"]), values=d["values"],
                  transform_log=int(d.get("transform_log", 0)),
                  diff_spec=tuple(d.get("diff_spec", (0, 0, 1))), name=d.get("name", ""))


# -- SARIMA fits --------------------------------------------------------------------

def _floats(a) -> list:
    return [encode_float(x) for x in np.asarray(a, dtype=float)]


def fit_to_dict(f: SarimaFit) -> dict:
    return {
        "spec": str(f.spec),
        "names": list(f.names),
        "params": _floats(f.params),
        "std_errors": _floats(f.std_errors),
        "t_values": _floats(f.t_values),
        "p_values": _floats(f.p_values),
        "sigma2": encode_float(f.sigma2),
        "objective": encode_float(f.objective),
        "mean": encode_float(f.mean),
        "mean_se": encode_float(f.mean_se),
        "include_mean": f.include_mean,
        "ar_root_min": encode_float(f.ar_root_min),
        "ma_root_min": encode_float(f.ma_root_min),
        "converged": f.converged,
        "n_evals": f.n_evals,
        "series": series_to_dict(f.series),
        "residuals": series_to_dict(f.residuals),
    }


def fit_from_dict(d: dict) -> SarimaFit:
    arr = lambda key: np.array([decode_float(x) for x in d[key]], dtype=float)  # noqa: E731
    return SarimaFit(
        spec=SarimaSpec.parse(d["spec"]),
        names=tuple(d["names"]),
        params=arr("params"),
        std_errors=arr("std_errors"),
        t_values=arr("t_values"),
        p_values=arr("p_values"),
        sigma2=decode_float(d["sigma2"]),
        residuals=series_from_dict(d["residuals"]),
        objective=decode_float(d["objective"]),
        series=series_from_dict(d["series"]),
        mean=decode_float(d["mean"]),
        mean_se=decode_float(d["mean_se"]),
        include_mean=bool(d["include_mean"]),
        ar_root_min=decode_float(d["ar_root_min"]),
        ma_root_min=decode_float(d["ma_root_min"]),
        converged=bool(d["converged"]),
        n_evals=int(d["n_evals"]),
    )


def save_fit(f: SarimaFit, path) -> Path:
    return dump_json(fit_to_dict(f), path)


def load_fit(path) -> SarimaFit:
    return fit_from_dict(load_json(path))


COEF_HEADER = ("parameter", "coefficient", "se", "t_value", "p_value")


def coefficient_rows(table: list[dict]) -> list[tuple]:
    return [tuple(r[k] for k in COEF_HEADER) for r in table]


# -- copulas ------------------------------------------------------------------------

def copula_to_dict(c: FittedCopula) -> dict:
    d = c.to_dict()
    d["theta"] = encode_float(d["theta"])
    return d


def copula_from_dict(d: dict) -> FittedCopula:
    d = dict(d)
    d["theta"] = decode_float(d["theta"])
    return FittedCopula.from_dict(d)


def coupled_to_dict(m: CoupledModel) -> dict:
    return {
        "copula": copula_to_dict(m.copula),
        "sigma_target": m.sigma_target,
        "sigma_driver": m.sigma_driver,
        "overlap_start": format_month(m.overlap_start),
        "n_overlap": m.n_overlap,
    }


# -- forecast tables ----------------------------------------------------------------

FORECAST_HEADER = ("month", "median", "mean", "lo95", "hi95")
DENSITY_HEADER = ("month", "bin_left", "bin_right", "count")
GOF_HEADER = ("family", "parameter", "cvm_statistic", "p_value")
CORRELOGRAM_HEADER = ("lag", "value", "ci")


def forecast_rows(dist: ForecastDistribution) -> list[tuple]:
    med = point_forecast(dist, "median")
    mean = point_forecast(dist, "mean")
    lo, hi = prediction_interval(dist, 0.95)
    return [
        (format_month(m), med[i], mean[i], lo[i], hi[i])
        for i, m in enumerate(dist.months())
    ]


def density_rows(dist: ForecastDistribution, bins: int = 100) -> list[tuple]:
    rows = []
    for m, (edges, counts) in zip(dist.months(), density_histogram(dist, bins)):
        label = format_month(m)
        rows.extend((label, edges[i], edges[i + 1], int(counts[i])) for i in range(counts.size))
    return rows
