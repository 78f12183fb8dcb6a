"""Seasonal ARIMA margins coupled through a residual copula.

Stage one fits a SARIMA model to each series by conditional sum of squares;
stage two fits a bivariate copula to the residual pseudo-observations and
forecasts the target by Monte Carlo with jointly drawn innovations.
"""
from .copula import Family, FittedCopula, fit_copula, kendall_tau, param_to_tau, sample, tau_to_param
from .diagnostics import acf, ljung_box, pacf, shapiro_wilk
from .errors import ArimaCopulaError
from .forecast import (
    CoupledModel,
    ForecastDistribution,
    ValidationReport,
    couple,
    forecast_joint,
    mse,
    point_forecast,
    prediction_interval,
    split_train_test,
)
from .gof import GofResult, cvm_statistic, gof_bootstrap, independence_test_multivariate
from .sarima import SarimaFit, SarimaSpec, coefficient_table, fit_css, forecast_point, simulate
from .series import Series, difference, integrate, log_transform, monthly_average, read_csv

__version__ = "0.1.0"

__all__ = [
    "ArimaCopulaError",
    "CoupledModel",
    "Family",
    "FittedCopula",
    "ForecastDistribution",
    "GofResult",
    "SarimaFit",
    "SarimaSpec",
    "Series",
    "ValidationReport",
    "acf",
    "coefficient_table",
    "couple",
    "cvm_statistic",
    "difference",
    "fit_copula",
    "fit_css",
    "forecast_joint",
    "forecast_point",
    "gof_bootstrap",
    "independence_test_multivariate",
    "integrate",
    "kendall_tau",
    "ljung_box",
    "log_transform",
    "monthly_average",
    "mse",
    "pacf",
    "param_to_tau",
    "point_forecast",
    "prediction_interval",
    "read_csv",
    "sample",
    "shapiro_wilk",
    "simulate",
    "split_train_test",
    "tau_to_param",
]
