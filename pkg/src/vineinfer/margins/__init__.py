"""Univariate filtering, skewed-t margins, probability integral transforms and outlier smoothing."""

from .garch import GarchFit, arch_lm, fit_arma_garch, garch_filter, ljung_box, simulate_arma_garch
from .outliers import Outlier, SmoothingResult, find_outliers, smooth_outliers
from .pipeline import LogNormalMargin, MarginPipeline, NormalMargin, ParametricMargins, inverse_pit, pit
from .skewt import MarginModel, fit_skewt, sstd_cdf, sstd_logpdf, sstd_ppf


def skewt_cdf(margin: MarginModel, x):
    return margin.cdf(x)


def skewt_quantile(margin: MarginModel, p):
    return margin.ppf(p)


__all__ = [
    "GarchFit", "MarginModel", "MarginPipeline", "NormalMargin", "LogNormalMargin", "ParametricMargins",
    "Outlier", "SmoothingResult", "arch_lm", "find_outliers", "fit_arma_garch", "fit_skewt",
    "garch_filter", "inverse_pit", "ljung_box", "pit", "simulate_arma_garch", "skewt_cdf",
    "skewt_quantile", "smooth_outliers", "sstd_cdf", "sstd_logpdf", "sstd_ppf",
]
