"""Fernandez-Steel skewed Student-t, standardised to zero mean and unit variance.

The standardised variable ``Z`` has density ``g * f(z_s / xi^sign(z_s))`` where
``z_s = sigma * z + mu`` undoes the standardisation and ``f`` is the
unit-variance t density; ``xi > 1`` skews to the right.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from ..copula._tdist import t_ppf
from ..exceptions import CopulaDomainError, FitError, InputError

__all__ = ["MarginModel", "sstd_logpdf", "sstd_cdf", "sstd_ppf", "fit_skewt"]


def _moments(nu, xi):
    m1 = 2.0 * np.sqrt(nu - 2.0) / (nu - 1.0) / special.beta(0.5, nu / 2.0)
    mu = m1 * (xi - 1.0 / xi)
    sigma = np.sqrt((1.0 - m1 * m1) * (xi * xi + 1.0 / (xi * xi)) + 2.0 * m1 * m1 - 1.0)
    return mu, sigma


def _check(nu, xi):
    if not nu > 2.0 or not np.isfinite(nu):
        raise CopulaDomainError(f"degrees of freedom must exceed 2, got {nu}")
    if not xi > 0.0 or not np.isfinite(xi):
        raise CopulaDomainError(f"skewness must be positive, got {xi}")


def sstd_logpdf(z, nu, xi):
    """Log density of the standardised skewed t."""
    _check(nu, xi)
    z = np.asarray(z, dtype=float)
    mu, sigma = _moments(nu, xi)
    zs = z * sigma + mu
    big_xi = np.where(zs >= 0.0, xi, 1.0 / xi)
    w = zs / big_xi
    # unit-variance t density at w
    logf = (special.gammaln((nu + 1.0) / 2.0) - special.gammaln(nu / 2.0)
            - 0.5 * np.log(np.pi * (nu - 2.0)) - (nu + 1.0) / 2.0 * np.log1p(w * w / (nu - 2.0)))
    return np.log(2.0 / (xi + 1.0 / xi)) + logf + np.log(sigma)


def _std_t_cdf(w, nu):
    return special.stdtr(nu, w * np.sqrt(nu / (nu - 2.0)))


def sstd_cdf(z, nu, xi):
    """Distribution function of the standardised skewed t."""
    _check(nu, xi)
    z = np.asarray(z, dtype=float)
    mu, sigma = _moments(nu, xi)
    zs = z * sigma + mu
    big_xi = np.where(zs >= 0.0, xi, 1.0 / xi)
    g = 2.0 / (xi + 1.0 / xi)
    sgn = np.where(zs >= 0.0, 1.0, -1.0)
    heav = (zs >= 0.0).astype(float)
    return heav - sgn * g * big_xi * _std_t_cdf(-np.abs(zs) / big_xi, nu)


def sstd_ppf(p, nu, xi):
    """Quantile function of the standardised skewed t."""
    _check(nu, xi)
    p = np.asarray(p, dtype=float)
    mu, sigma = _moments(nu, xi)
    g = 2.0 / (xi + 1.0 / xi)
    split = 1.0 / (1.0 + xi * xi)
    upper = p >= split
    big_xi = np.where(upper, xi, 1.0 / xi)
    sgn = np.where(upper, 1.0, -1.0)
    pp = (upper.astype(float) - sgn * p) / (g * big_xi)
    w = t_ppf(nu, pp) * np.sqrt((nu - 2.0) / nu)
    return (-sgn * w * big_xi - mu) / sigma


@dataclass(frozen=True)
class MarginModel:
    """Location-scale skewed t: ``X = location + scale * Z``."""

    location: float
    scale: float
    skew: float
    df: float

    def __post_init__(self):
        if not self.scale > 0.0:
            raise CopulaDomainError("scale must be positive")
        _check(self.df, self.skew)

    def logpdf(self, x):
        z = (np.asarray(x, dtype=float) - self.location) / self.scale
        return sstd_logpdf(z, self.df, self.skew) - np.log(self.scale)

    def cdf(self, x):
        return sstd_cdf((np.asarray(x, dtype=float) - self.location) / self.scale, self.df, self.skew)

    def ppf(self, p):
        return self.location + self.scale * sstd_ppf(p, self.df, self.skew)

    def to_dict(self) -> dict:
        return {"location": self.location, "scale": self.scale, "skew": self.skew, "df": self.df}

    @classmethod
    def from_dict(cls, d: dict) -> "MarginModel":
        return cls(float(d["location"]), float(d["scale"]), float(d["skew"]), float(d["df"]))


_DF_MAX = 200.0


def fit_skewt(x) -> MarginModel:
    """Maximum-likelihood skewed-t margin."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 20 or not np.all(np.isfinite(x)):
        raise InputError("need at least 20 finite observations")
    sd = float(np.std(x))
    if sd == 0.0:
        raise InputError("zero-variance series")
    mean = float(np.mean(x))

    def unpack(v):
        return (mean + sd * v[0], sd * np.exp(v[1]), np.exp(v[2]),
                min(2.0 + np.exp(v[3]), _DF_MAX))

    def nll(v):
        loc, scale, xi, nu = unpack(v)
        if not (np.isfinite(scale) and scale > 0 and 0.05 < xi < 20.0):
            return 1e100
        val = -np.sum(sstd_logpdf((x - loc) / scale, nu, xi)) + x.size * np.log(scale)
        return val if np.isfinite(val) else 1e100

    best = None
    for start in ([0.0, 0.0, 0.0, np.log(6.0)], [0.0, 0.0, 0.0, np.log(28.0)]):
        res = optimize.minimize(nll, np.asarray(start), method="Nelder-Mead",
                                options={"xatol": 1e-8, "fatol": 1e-10, "maxiter": 4000})
        if best is None or res.fun < best.fun:
            best = res
    if not np.isfinite(best.fun) or best.fun >= 1e100:
        raise FitError("skewed-t fit failed")
    return MarginModel(*(float(t) for t in unpack(best.x)))
