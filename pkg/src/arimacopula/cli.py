"""Command-line pipeline: ingest, diagnose, fit-arima, fit-copula, gof,
forecast, validate, report (plus ``synth`` for demo data and ``all``).

Configuration is an INI file::

    [pipeline]
    target = stock              ; series to forecast
    driver = oil                ; series coupled to it through the copula
    families = clayton,gumbel,frank,normal,t,plackett
    copula = clayton            ; family used by forecast/validate (default: first family)
    n_boot = 200
    horizon = 12
    n_sims = 20000
    seed = 42                   ; mandatory unless --seed is given
    cutoff = 2010-12            ; last training month (optional)
    conditional = false         ; validate: condition on realized driver shocks
    jobs = 1

    [series.stock]
    path = stock.csv            ; relative to the config file
    log = true
    spec = (0,2,2)

Every stage reads the config plus the files earlier stages wrote to the
output directory (``--out``, else ``$ARIMACOPULA_OUT``, else ``out`` under
the config directory). Domain errors exit with status 1, usage errors with 2.
"""
from __future__ import annotations

import argparse
import configparser
import itertools
import os
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import serialize as io
from .copula import Family, pseudo_observations, rank_correlation
from .diagnostics import acf, ljung_box, pacf, shapiro_wilk
from .errors import ArimaCopulaError, ConfigError
from .forecast import (
    couple,
    driver_test_innovations,
    forecast_joint,
    point_forecast,
    split_train_test,
    validation_report,
)
from .gof import gof_bootstrap, independence_test_multivariate
from .sarima import SarimaSpec, coefficient_table, fit_css, forecast_point
from .series import Series, format_month, log_transform, parse_month, read_csv, write_csv

OUT_ENV = "ARIMACOPULA_OUT"
DEFAULT_FAMILIES = ("clayton", "gumbel", "frank", "normal", "t", "plackett")


@dataclass(frozen=True)
class SeriesConfig:
    name: str
    path: Path
    log: bool
    spec: SarimaSpec


@dataclass(frozen=True)
class PipelineConfig:
    series: dict[str, SeriesConfig]
    target: str
    driver: str
    families: tuple[str, ...]
    copula: str
    n_boot: int
    horizon: int
    n_sims: int
    seed: int
    cutoff: tuple[int, int] | None
    conditional: bool = False
    jobs: int = 1
    base_dir: Path = field(default_factory=Path)

    @property
    def names(self) -> list[str]:
        return list(self.series)


def load_config(path, seed: int | None = None) -> PipelineConfig:
    """Parse and validate a pipeline INI file.

    ``seed`` (from the command line) overrides the file's value.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if "pipeline" not in cp:
        raise ConfigError(f"{path}: missing [pipeline] section")
    p = cp["pipeline"]
    base = path.parent
    series = {}
    for sec in cp.sections():
        if not sec.startswith("series."):
            continue
        name = sec.split(".", 1)[1]
        s = cp[sec]
        if "path" not in s or "spec" not in s:
            raise ConfigError(f"[{sec}] needs 'path' and 'spec'")
        try:
            spec = SarimaSpec.parse(s["spec"])
        except ValueError as exc:
            raise ConfigError(f"[{sec}] {exc}") from exc
        series[name] = SeriesConfig(name, base / s["path"], s.getboolean("log", True), spec)
    if len(series) < 2:
        raise ConfigError("at least two [series.NAME] sections are required")
    target, driver = p.get("target"), p.get("driver")
    for role, name in (("target", target), ("driver", driver)):
        if name not in series:
            raise ConfigError(f"{role} {name!r} has no [series.{name}] section")
    if target == driver:
        raise ConfigError("target and driver must differ")
    families = tuple(f.strip() for f in p.get("families", ",".join(DEFAULT_FAMILIES)).split(",") if f.strip())
    for f in families:
        Family.parse(f)
    seed_text = p.get("seed")
    if seed is None:
        if seed_text is None:
            raise ConfigError("a seed is required (config 'seed' or --seed)")
        seed = int(seed_text)
    cutoff = p.get("cutoff")
    try:
        return PipelineConfig(
            series=series,
            target=target,
            driver=driver,
            families=families,
            copula=Family.parse(p.get("copula", families[0] if families else "clayton")).value,
            n_boot=p.getint("n_boot", 1000),
            horizon=p.getint("horizon", 12),
            n_sims=p.getint("n_sims", 20000),
            seed=int(seed),
            cutoff=parse_month(cutoff) if cutoff else None,
            conditional=p.getboolean("conditional", False),
            jobs=p.getint("jobs", 1),
            base_dir=base,
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


# -- stage helpers -------------------------------------------------------------------

def _need(path: Path) -> Path:
    if not path.is_file():
        raise FileNotFoundError(f"required input not found: {path} (run the earlier stage first)")
    return path


def _modeled(out: Path, name: str) -> Series:
    return read_csv(_need(out / f"series_{name}.csv"), name=name)


def _training(cfg: PipelineConfig, s: Series) -> Series:
    if cfg.cutoff is None:
        return s
    return split_train_test(s, cfg.cutoff)[0]


def _fit_path(out: Path, name: str) -> Path:
    return out / f"fit_{name}.json"


def _fits(cfg: PipelineConfig, out: Path) -> dict:
    return {n: io.load_fit(_need(_fit_path(out, n))) for n in cfg.names}


def _coupled(cfg: PipelineConfig, out: Path):
    fits = _fits(cfg, out)
    model = couple(fits[cfg.target], fits[cfg.driver], cfg.copula)
    saved = io.copula_from_dict(io.load_json(_need(out / "copula.json"))["copula"])
    if saved.family != model.copula.family or saved.theta != model.copula.theta:
        raise ConfigError("copula.json does not match the current fits; rerun fit-copula")
    return model, fits


def stage_ingest(cfg: PipelineConfig, out: Path) -> list[Path]:
    written = []
    for sc in cfg.series.values():
        raw = read_csv(_need(sc.path), name=sc.name)
        s = log_transform(raw) if sc.log else raw
        p = out / f"series_{sc.name}.csv"
        write_csv(s, p)
        written.append(p)
    return written


def stage_diagnose(cfg: PipelineConfig, out: Path) -> list[Path]:
    rows, written = [], []
    for name in cfg.names:
        s = _modeled(out, name)
        lb = ljung_box(s.values)
        rows.append((name, lb.statistic, lb.df_or_n, lb.p_value))
        for label, fn in (("acf", acf), ("pacf", pacf)):
            cg = fn(s.values, max_lag=min(24, len(s) - 1))
            written.append(io.write_rows(out / f"{label}_{name}.csv", io.CORRELOGRAM_HEADER, cg.rows()))
    written.insert(0, io.write_rows(out / "ljung_box.csv", ("series", "x_squared", "df", "p_value"), rows))
    return written


def stage_fit_arima(cfg: PipelineConfig, out: Path) -> list[Path]:
    coef_rows, test_rows, written = [], [], []
    for name, sc in cfg.series.items():
        train = _training(cfg, _modeled(out, name))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            fit = fit_css(train, sc.spec)
        for w in caught:
            print(f"warning: {name}: {w.message}", file=sys.stderr)
        written.append(io.save_fit(fit, _fit_path(out, name)))
        write_csv(fit.residuals, out / f"residuals_{name}.csv")
        resid = fit.residuals.values
        for label, fn in (("acf", acf), ("pacf", pacf)):
            cg = fn(resid, max_lag=min(24, resid.size - 1))
            io.write_rows(out / f"residual_{label}_{name}.csv", io.CORRELOGRAM_HEADER, cg.rows())
        for r in coefficient_table(fit):
            coef_rows.append((name, str(fit.spec)) + io.coefficient_rows([r])[0])
        sw = shapiro_wilk(resid)
        lb = ljung_box(resid, fitdf=fit.spec.n_arma, box_pierce=True)
        test_rows.append((name, fit.sigma2, sw.statistic, sw.p_value, lb.statistic, lb.df_or_n, lb.p_value))
    written.append(io.write_rows(out / "coefficients.csv", ("series", "spec") + io.COEF_HEADER, coef_rows))
    written.append(io.write_rows(
        out / "residual_tests.csv",
        ("series", "sigma2", "shapiro_w", "shapiro_p", "box_pierce", "df", "box_pierce_p"), test_rows))
    return written


def _aligned_residuals(fits: dict) -> tuple[list[str], np.ndarray]:
    names = list(fits)
    first = max(f.residuals.start for f in fits.values())
    last = min(f.residuals.end for f in fits.values())
    cols = [fits[n].residuals.window(first, last).values for n in names]
    return names, np.column_stack(cols)


def stage_fit_copula(cfg: PipelineConfig, out: Path) -> list[Path]:
    fits = _fits(cfg, out)
    rows = []
    names, data = _aligned_residuals(fits)
    for (i, a), (j, b) in itertools.combinations(enumerate(names), 2):
        rc = rank_correlation(data[:, i], data[:, j])
        rows.append((a, b, rc.n, rc.tau, rc.p_tau, rc.rho_s, rc.p_rho))
    written = [io.write_rows(out / "rank_correlation.csv",
                             ("series_a", "series_b", "n", "kendall_tau", "p_tau", "spearman_rho", "p_rho"), rows)]
    indep = independence_test_multivariate(data, n_perm=max(cfg.n_boot, 100), seed=cfg.seed)
    written.append(io.dump_json({"series": names, **{k: io.encode_float(v) if isinstance(v, float) else v
                                                       for k, v in indep.to_dict().items()}},
                                out / "independence.json"))
    model = couple(fits[cfg.target], fits[cfg.driver], cfg.copula)
    written.append(io.dump_json({"target": cfg.target, "driver": cfg.driver, **io.coupled_to_dict(model)},
                                out / "copula.json"))
    return written


def stage_gof(cfg: PipelineConfig, out: Path, families=None) -> list[Path]:
    fits = _fits(cfg, out)
    _, data = _aligned_residuals({cfg.target: fits[cfg.target], cfg.driver: fits[cfg.driver]})
    u = pseudo_observations(data)
    rows = []
    for fam in families or cfg.families:
        res = gof_bootstrap(u, fam, n_boot=cfg.n_boot, seed=cfg.seed, n_jobs=cfg.jobs)
        label = f"t (df={res.df:g})" if res.df is not None else res.family
        rows.append((label, res.theta_hat, res.s_n, res.p_value))
    return [io.write_rows(out / "gof.csv", io.GOF_HEADER, rows)]


def stage_forecast(cfg: PipelineConfig, out: Path) -> list[Path]:
    model, fits = _coupled(cfg, out)
    dist = forecast_joint(model, cfg.horizon, cfg.n_sims, cfg.seed, n_jobs=cfg.jobs)
    written = [io.write_rows(out / "forecast.csv", io.FORECAST_HEADER, io.forecast_rows(dist)),
               io.write_rows(out / "density.csv", io.DENSITY_HEADER, io.density_rows(dist))]
    arima = forecast_point(fits[cfg.target], cfg.horizon)
    coupled = point_forecast(dist, "median")
    full = _modeled(out, cfg.target)
    rows = []
    for i, m in enumerate(dist.months()):
        actual = full.values[full.index_of(m)] if m <= full.end else ""
        rows.append((format_month(m), arima[i], coupled[i], actual))
    written.append(io.write_rows(out / "table8.csv", ("month", "arima", f"arima_{cfg.copula}", "actual"), rows))
    return written


def stage_validate(cfg: PipelineConfig, out: Path) -> list[Path]:
    model, fits = _coupled(cfg, out)
    full = _modeled(out, cfg.target)
    if cfg.cutoff is None:
        raise ConfigError("validate needs a 'cutoff' in [pipeline]")
    _, test = split_train_test(full, cfg.cutoff)
    h = len(test)
    driver_innov = None
    if cfg.conditional:
        driver_full = _modeled(out, cfg.driver)
        driver_innov = driver_test_innovations(fits[cfg.driver], driver_full, h)
    dist = forecast_joint(model, h, cfg.n_sims, cfg.seed, driver_innovations=driver_innov, n_jobs=cfg.jobs)
    reports = {
        "arima": validation_report("arima", test, forecast_point(fits[cfg.target], h)),
        "arima-copula": validation_report(f"arima-{cfg.copula}", test, point_forecast(dist, "median")),
    }
    doc = {k: v.to_dict() for k, v in reports.items()}
    doc["conditional"] = cfg.conditional
    return [io.dump_json(doc, out / "validation.json")]


REPORT_PARTS = (
    ("Ljung-Box test on modeled series", "ljung_box.csv"),
    ("Fitted SARIMA coefficients", "coefficients.csv"),
    ("Residual normality and whiteness", "residual_tests.csv"),
    ("Residual rank correlations", "rank_correlation.csv"),
    ("Multivariate independence test", "independence.json"),
    ("Copula goodness of fit", "gof.csv"),
    ("Point forecasts", "table8.csv"),
    ("Forecast summary", "forecast.csv"),
    ("Validation", "validation.json"),
)


def stage_report(cfg: PipelineConfig, out: Path) -> list[Path]:
    lines = [f"# Pipeline report: target {cfg.target}, driver {cfg.driver}, seed {cfg.seed}", ""]
    for title, fname in REPORT_PARTS:
        p = out / fname
        lines.append(f"## {title} ({fname})")
        lines.append(p.read_text().rstrip("\n") if p.is_file() else "(not generated)")
        lines.append("")
    path = out / "report.md"
    path.write_text("\n".join(lines))
    return [path]


STAGES = {
    "ingest": stage_ingest,
    "diagnose": stage_diagnose,
    "fit-arima": stage_fit_arima,
    "fit-copula": stage_fit_copula,
    "gof": stage_gof,
    "forecast": stage_forecast,
    "validate": stage_validate,
    "report": stage_report,
}


def _output_dir(args, cfg: PipelineConfig | None) -> Path:
    if args.out:
        out = Path(args.out)
    elif os.environ.get(OUT_ENV):
        out = Path(os.environ[OUT_ENV])
    else:
        out = (cfg.base_dir if cfg else Path(".")) / "out"
    out.mkdir(parents=True, exist_ok=True)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arimacopula",
                                     description="SARIMA margins coupled through a residual copula.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="pipeline INI file")
    common.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./out)")
    common.add_argument("--seed", type=int, help="override the config seed")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in STAGES:
        sp = sub.add_parser(name, parents=[common])
        if name == "gof":
            sp.add_argument("--families", help="comma-separated families (default: from config)")
    sub.add_parser("all", parents=[common], help="run every stage in order")
    sp = sub.add_parser("synth", help="write the synthetic demo dataset and its config")
    sp.add_argument("--out", required=True)
    sp.add_argument("--seed", type=int, default=2011)
    sp.add_argument("--months", type=int, default=162)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "synth":
            from .synth import make_demo_dataset

            print(make_demo_dataset(args.out, seed=args.seed, n_months=args.months))
            return 0
        cfg = load_config(args.config, seed=args.seed)
        out = _output_dir(args, cfg)
        if args.command == "all":
            written = []
            for fn in STAGES.values():
                written += fn(cfg, out)
        elif args.command == "gof":
            fams = None
            if args.families:
                fams = [f.strip() for f in args.families.split(",") if f.strip()]
                for f in fams:
                    Family.parse(f)
            written = stage_gof(cfg, out, fams)
        else:
            written = STAGES[args.command](cfg, out)
    except (ArimaCopulaError, OSError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for p in written:
        print(p)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
