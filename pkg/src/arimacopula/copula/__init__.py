"""Bivariate copulas: families, rank statistics, fitting and sampling."""
from .families import (
    DEFAULT_T_DF,
    Family,
    FittedCopula,
    copula_cdf,
    copula_density,
    h_function,
    h_inverse,
    log_density,
    lower_tail_dependence,
    param_to_tau,
    sample,
    tau_range,
    tau_to_param,
    upper_tail_dependence,
)
from .fit import fit_copula
from .rank import RankCorrelation, kendall_tau, pseudo_observations, rank_correlation, spearman_rho

__all__ = [
    "DEFAULT_T_DF",
    "Family",
    "FittedCopula",
    "RankCorrelation",
    "copula_cdf",
    "copula_density",
    "fit_copula",
    "h_function",
    "h_inverse",
    "kendall_tau",
    "log_density",
    "lower_tail_dependence",
    "param_to_tau",
    "pseudo_observations",
    "rank_correlation",
    "sample",
    "spearman_rho",
    "tau_range",
    "tau_to_param",
    "upper_tail_dependence",
]
