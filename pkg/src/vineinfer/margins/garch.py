"""ARMA(1,1)-GARCH(1,1) filtering with skewed-t innovations."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from .. import _backend
from ..exceptions import FitError, InputError
from .skewt import sstd_logpdf

__all__ = ["GarchFit", "fit_arma_garch", "garch_filter", "simulate_arma_garch", "ljung_box", "arch_lm"]

_PERSIST_MAX = 0.9999
_DF_MAX = 100.0
_DF_MIN = 2.05
_MIN_LENGTH = 300


@dataclass(frozen=True)
class GarchFit:
    """Fitted filter; ``residuals`` are ``eps_t / sigma_t``."""

    mu: float
    phi: float
    theta: float
    omega: float
    alpha: float
    beta: float
    skew: float
    df: float
    sigma2_0: float
    loglik: float
    residuals: np.ndarray = field(repr=False)
    sigma: np.ndarray = field(repr=False)
    converged: bool = True
    at_boundary: bool = False

    def params(self) -> dict:
        return {k: getattr(self, k) for k in
                ("mu", "phi", "theta", "omega", "alpha", "beta", "skew", "df", "sigma2_0")}

    def to_dict(self) -> dict:
        out = self.params()
        out.update(loglik=self.loglik, converged=self.converged, at_boundary=self.at_boundary)
        return out

    def filter(self, series):
        """Standardised residuals and volatilities of ``series`` under these parameters."""
        return garch_filter(series, **{k: v for k, v in self.params().items() if k not in ("skew", "df")})


def garch_filter(series, mu, phi, theta, omega, alpha, beta, sigma2_0):
    """Return ``(residuals, sigma)`` of the ARMA-GARCH recursion."""
    x = np.ascontiguousarray(series, dtype=float)
    eps, s2 = _backend.arma_garch_recursion(x, float(mu), float(phi), float(theta), float(omega),
                                            float(alpha), float(beta), float(sigma2_0))
    sigma = np.sqrt(s2)
    return eps / sigma, sigma


def simulate_arma_garch(n, mu=0.0, phi=0.0, theta=0.0, omega=0.05, alpha=0.1, beta=0.85,
                        skew=1.0, df=None, seed=None, burn=500):
    """Simulate a path; ``df=None`` gives Gaussian innovations."""
    from .skewt import sstd_ppf

    rng = np.random.default_rng(seed)
    m = n + burn
    if df is None:
        z = rng.standard_normal(m)
    else:
        z = sstd_ppf(rng.random(m), df, skew)
    s2_0 = omega / max(1.0 - alpha - beta, 1e-6)
    x, s2 = _backend.garch_simulate(np.ascontiguousarray(z), float(mu), float(phi), float(theta),
                                    float(omega), float(alpha), float(beta), float(s2_0))
    return x[burn:]


def _logistic(v):
    return special.expit(v)


def _unpack(v, scale):
    mu = scale * v[0]
    phi = np.tanh(v[1])
    theta = np.tanh(v[2])
    omega = scale * scale * np.exp(v[3])
    persist = _PERSIST_MAX * _logistic(v[4])
    alpha = persist * _logistic(v[5])
    beta = persist - alpha
    skew = np.exp(v[6])
    df = _DF_MIN + min(np.exp(min(v[7], 10.0)), _DF_MAX - _DF_MIN)
    return mu, phi, theta, omega, alpha, beta, skew, df


def _pack(mu, phi, theta, omega, alpha, beta, skew, df, scale):
    persist = alpha + beta
    return np.array([
        mu / scale, np.arctanh(phi), np.arctanh(theta), np.log(omega / (scale * scale)),
        special.logit(persist / _PERSIST_MAX), special.logit(alpha / persist),
        np.log(skew), np.log(df - _DF_MIN),
    ])


def fit_arma_garch(series) -> GarchFit:
    """Quasi-maximum-likelihood ARMA(1,1)-GARCH(1,1) with skewed-t innovations.

    The variance recursion starts at the sample variance and the pre-sample
    innovation is zero.  Parameters are optimised on an unconstrained scale
    (tanh for the ARMA terms, log for ``omega``, a logistic split of the
    persistence ``alpha + beta < 1``) by Nelder-Mead from three fixed starts.

    Raises
    ------
    InputError
        Fewer than 300 values, non-finite values or zero variance.
    FitError
        No start produced a finite likelihood.
    """
    x = np.ascontiguousarray(series, dtype=float)
    if x.ndim != 1 or x.size < _MIN_LENGTH:
        raise InputError(f"need a series of length at least {_MIN_LENGTH}")
    if not np.all(np.isfinite(x)):
        raise InputError("series contains non-finite values")
    var0 = float(np.var(x))
    if var0 == 0.0:
        raise InputError("zero-variance series")
    scale = np.sqrt(var0)
    mean = float(np.mean(x))

    def nll(v):
        mu, phi, theta, omega, alpha, beta, skew, df = _unpack(v, scale)
        if not (0.02 < skew < 50.0):
            return 1e100
        eps, s2 = _backend.arma_garch_recursion(x, mu, phi, theta, omega, alpha, beta, var0)
        if not np.all(s2 > 0.0):
            return 1e100
        with np.errstate(all="ignore"):
            sig = np.sqrt(s2)
            val = -(np.sum(sstd_logpdf(eps / sig, df, skew)) - np.sum(np.log(sig)))
        return val if np.isfinite(val) else 1e100

    starts = [
        (mean, 0.0, 0.0, var0 * 0.05, 0.05, 0.90, 1.0, 8.0),
        (mean, 0.1, -0.1, var0 * 0.10, 0.10, 0.80, 1.0, 5.0),
        (mean, 0.0, 0.0, var0 * 0.50, 0.15, 0.35, 1.0, 12.0),
    ]
    best = None
    for s in starts:
        v0 = _pack(*s, scale=scale)
        res = optimize.minimize(nll, v0, method="Nelder-Mead",
                                options={"maxiter": 6000, "maxfev": 12000, "xatol": 1e-6, "fatol": 1e-8})
        # one restart from the optimum to escape simplex collapse
        res2 = optimize.minimize(nll, res.x, method="Nelder-Mead",
                                 options={"maxiter": 4000, "maxfev": 8000, "xatol": 1e-7, "fatol": 1e-9})
        if res2.fun <= res.fun:
            res = res2
        if best is None or res.fun < best.fun:
            best = res
    if best is None or not np.isfinite(best.fun) or best.fun >= 1e100:
        raise FitError("ARMA-GARCH fit failed to find a finite likelihood")
    mu, phi, theta, omega, alpha, beta, skew, df = (float(t) for t in _unpack(best.x, scale))
    resid, sigma = garch_filter(x, mu, phi, theta, omega, alpha, beta, var0)
    boundary = alpha + beta > 0.999 * _PERSIST_MAX or abs(phi) > 0.999 or abs(theta) > 0.999
    return GarchFit(mu, phi, theta, omega, alpha, beta, skew, df, var0, -float(best.fun),
                    resid, sigma, bool(best.success), bool(boundary))


def ljung_box(x, lags: int = 10) -> float:
    """p-value of the Ljung-Box test at ``lags``."""
    from statsmodels.stats.diagnostic import acorr_ljungbox

    res = acorr_ljungbox(np.asarray(x, dtype=float), lags=[lags])
    return float(res["lb_pvalue"].iloc[0])


def arch_lm(x, lags: int = 5) -> float:
    """p-value of Engle's ARCH-LM test at ``lags``."""
    from statsmodels.stats.diagnostic import het_arch

    return float(het_arch(np.asarray(x, dtype=float), nlags=lags)[1])
