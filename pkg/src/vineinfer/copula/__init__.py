"""Bivariate copula families, conditional functions and edge fitting."""

from .bivariate import (
    EPS,
    BivariateCopula,
    CopulaFamily,
    Reflection,
    clamp,
    copula_cdf,
    copula_pdf,
    frank_tau,
    hfunc,
    hinv,
    simulate_pair,
)
from .fit import EdgeFit, fit_edge_mle, information_criteria, sample_tau, standard_errors

__all__ = [
    "EPS",
    "BivariateCopula",
    "CopulaFamily",
    "Reflection",
    "EdgeFit",
    "clamp",
    "copula_cdf",
    "copula_pdf",
    "hfunc",
    "hinv",
    "simulate_pair",
    "fit_edge_mle",
    "frank_tau",
    "information_criteria",
    "sample_tau",
    "standard_errors",
]
