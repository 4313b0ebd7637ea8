"""Unrotated bivariate copula kernels.

Every family here is exchangeable, so a single conditional function
``h(a | b) = dC(a, b)/db`` covers both conditioning directions.  All
functions are vectorised over broadcastable ``a`` and ``b`` that have already
been clamped into the open unit interval.
"""

import numpy as np
from scipy import integrate, special

from ._tdist import t_ppf

__all__ = ["cdf", "logpdf", "hfunc", "hinv", "evaluate", "KINDS"]

KINDS = ("I", "N", "t", "C", "G", "F", "BB1", "BB8")

_LOG_PI = np.log(np.pi)


# -- elliptical ------------------------------------------------------------

def _gauss_logpdf(theta, a, b):
    rho = theta[0]
    x = special.ndtri(a)
    y = special.ndtri(b)
    r2 = 1.0 - rho * rho
    return -0.5 * np.log(r2) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2)


def _gauss_h(theta, a, b):
    rho = theta[0]
    x = special.ndtri(a)
    y = special.ndtri(b)
    return special.ndtr((x - rho * y) / np.sqrt(1.0 - rho * rho))


def _gauss_hinv(theta, p, b):
    rho = theta[0]
    y = special.ndtri(b)
    return special.ndtr(special.ndtri(p) * np.sqrt(1.0 - rho * rho) + rho * y)


def _t_logpdf(theta, a, b):
    rho, nu = theta
    x = t_ppf(nu, a)
    y = t_ppf(nu, b)
    r2 = 1.0 - rho * rho
    q = (x * x + y * y - 2.0 * rho * x * y) / (nu * r2)
    log2 = (special.gammaln((nu + 2.0) / 2.0) - special.gammaln(nu / 2.0)
            - np.log(nu) - _LOG_PI - 0.5 * np.log(r2)
            - (nu + 2.0) / 2.0 * np.log1p(q))
    c1 = special.gammaln((nu + 1.0) / 2.0) - special.gammaln(nu / 2.0) - 0.5 * (np.log(nu) + _LOG_PI)
    log1 = 2.0 * c1 - (nu + 1.0) / 2.0 * (np.log1p(x * x / nu) + np.log1p(y * y / nu))
    return log2 - log1


def _t_h(theta, a, b):
    rho, nu = theta
    x = t_ppf(nu, a)
    y = t_ppf(nu, b)
    scale = np.sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0))
    return special.stdtr(nu + 1.0, (x - rho * y) / scale)


def _t_hinv(theta, p, b):
    rho, nu = theta
    y = t_ppf(nu, b)
    scale = np.sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0))
    return special.stdtr(nu, t_ppf(nu + 1.0, p) * scale + rho * y)


# -- Archimedean -----------------------------------------------------------

def _clayton_cdf(theta, a, b):
    th = theta[0]
    s = np.expm1(-th * np.log(a)) + np.expm1(-th * np.log(b))
    return np.exp(-np.log1p(s) / th)


def _clayton_logpdf(theta, a, b):
    th = theta[0]
    la, lb = np.log(a), np.log(b)
    s = np.expm1(-th * la) + np.expm1(-th * lb)
    return np.log1p(th) - (th + 1.0) * (la + lb) - (2.0 + 1.0 / th) * np.log1p(s)


def _clayton_h(theta, a, b):
    th = theta[0]
    lb = np.log(b)
    s = np.expm1(-th * np.log(a)) + np.expm1(-th * lb)
    return np.exp(-(th + 1.0) * lb - (1.0 + 1.0 / th) * np.log1p(s))


def _clayton_hinv(theta, p, b):
    th = theta[0]
    k = np.exp(-th * np.log(b)) * np.expm1(-th / (1.0 + th) * np.log(p))
    return np.exp(-np.log1p(k) / th)


def _gumbel_parts(th, a, b):
    x = -np.log(a)
    y = -np.log(b)
    lx, ly = np.log(x), np.log(y)
    log_big_a = np.logaddexp(th * lx, th * ly) / th
    return x, y, lx, ly, log_big_a


def _gumbel_cdf(theta, a, b):
    _, _, _, _, lA = _gumbel_parts(theta[0], a, b)
    return np.exp(-np.exp(lA))


def _gumbel_logpdf(theta, a, b):
    th = theta[0]
    x, y, lx, ly, lA = _gumbel_parts(th, a, b)
    big_a = np.exp(lA)
    return (-big_a + x + y + (th - 1.0) * (lx + ly) + (1.0 - 2.0 * th) * lA
            + np.log(big_a + th - 1.0))


def _gumbel_h(theta, a, b):
    th = theta[0]
    _, y, _, ly, lA = _gumbel_parts(th, a, b)
    return np.exp(-np.exp(lA) + (1.0 - th) * lA + (th - 1.0) * ly + y)


def _gumbel_hinv(theta, p, b):
    # Solve z + (th-1) log z = y + (th-1) log y - log p for z = A >= y, then
    # recover x from A^th = x^th + y^th.
    th = theta[0]
    p, b = np.broadcast_arrays(np.asarray(p, dtype=float), np.asarray(b, dtype=float))
    y = -np.log(b)
    if th == 1.0:
        return p.copy()
    rhs = y + (th - 1.0) * np.log(y) - np.log(p)
    z = y - np.log(p)
    for _ in range(100):
        f = z + (th - 1.0) * np.log(z) - rhs
        step = f / (1.0 + (th - 1.0) / z)
        z_new = np.maximum(z - step, y)
        if np.all(np.abs(z_new - z) <= 1e-15 * z_new):
            z = z_new
            break
        z = z_new
    lz = np.log(z)
    ly = np.log(y)
    tail = -np.expm1(th * (ly - lz))
    with np.errstate(divide="ignore"):
        lx = lz + np.log(tail) / th
    return np.exp(-np.exp(lx))


def _frank_cdf(theta, a, b):
    th = theta[0]
    e = np.expm1(-th)
    return -np.log1p(np.expm1(-th * a) * np.expm1(-th * b) / e) / th


def _frank_logpdf(theta, a, b):
    th = theta[0]
    e = np.expm1(-th)
    den = e + np.expm1(-th * a) * np.expm1(-th * b)
    return np.log(-th * e) - th * (a + b) - 2.0 * np.log(np.abs(den))


def _frank_h(theta, a, b):
    th = theta[0]
    e = np.expm1(-th)
    ea = np.expm1(-th * a)
    return np.exp(-th * b) * ea / (e + ea * np.expm1(-th * b))


def _frank_hinv(theta, p, b):
    th = theta[0]
    e = np.expm1(-th)
    ea = p * e / (np.exp(-th * b) - p * np.expm1(-th * b))
    return -np.log1p(ea) / th


# -- two-parameter Archimedean --------------------------------------------

def _bb1_parts(theta, a, b):
    th, de = theta
    la, lb = np.log(a), np.log(b)
    lx = np.log(np.expm1(-th * la))
    ly = np.log(np.expm1(-th * lb))
    lw = np.logaddexp(de * lx, de * ly) / de
    return la, lb, lx, ly, lw


def _bb1_cdf(theta, a, b):
    th = theta[0]
    lw = _bb1_parts(theta, a, b)[4]
    return np.exp(-np.log1p(np.exp(lw)) / th)


def _bb1_logpdf(theta, a, b):
    th, de = theta
    la, lb, lx, ly, lw = _bb1_parts(theta, a, b)
    w = np.exp(lw)
    return (-(1.0 / th + 2.0) * np.log1p(w) + (1.0 - 2.0 * de) * lw
            + np.log(th * (de - 1.0) + (th * de + 1.0) * w)
            + (de - 1.0) * (lx + ly) - (th + 1.0) * (la + lb))


def _bb1_h(theta, a, b):
    th, de = theta
    _, lb, _, ly, lw = _bb1_parts(theta, a, b)
    return np.exp(-(1.0 / th + 1.0) * np.log1p(np.exp(lw)) + (1.0 - de) * lw
                  + (de - 1.0) * ly - (th + 1.0) * lb)


def _bb8_parts(theta, a, b):
    th, de = theta
    eta = -np.expm1(th * np.log1p(-de))
    l1a = np.log1p(-de * a)
    l1b = np.log1p(-de * b)
    x = -np.expm1(th * l1a)
    y = -np.expm1(th * l1b)
    return eta, l1a, l1b, x, y


def _bb8_cdf(theta, a, b):
    th, de = theta
    eta, _, _, x, y = _bb8_parts(theta, a, b)
    return -np.expm1(np.log1p(-x * y / eta) / th) / de


def _bb8_logpdf(theta, a, b):
    th, de = theta
    eta, l1a, l1b, x, y = _bb8_parts(theta, a, b)
    z = x * y / eta
    return (np.log(de) - np.log(eta) + (th - 1.0) * (l1a + l1b)
            + (1.0 / th - 2.0) * np.log1p(-z) + np.log(th - z))


def _bb8_h(theta, a, b):
    th, de = theta
    eta, _, l1b, x, y = _bb8_parts(theta, a, b)
    z = x * y / eta
    return np.exp((1.0 / th - 1.0) * np.log1p(-z) + (th - 1.0) * l1b) * x / eta


# -- independence ----------------------------------------------------------

def _indep_cdf(theta, a, b):
    return a * b


def _indep_logpdf(theta, a, b):
    return np.zeros(np.broadcast(a, b).shape)


def _indep_h(theta, a, b):
    return np.broadcast_to(a, np.broadcast(a, b).shape).astype(float)


def _indep_hinv(theta, p, b):
    return np.broadcast_to(p, np.broadcast(p, b).shape).astype(float)


# -- generic fallbacks -----------------------------------------------------

def _cdf_by_quadrature(h, theta, a, b):
    """C(a, b) as the integral over s in [0, a] of h(b | s)."""
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    out = np.empty(a.shape)
    for idx in np.ndindex(a.shape):
        bi = b[idx]
        val, _ = integrate.quad(lambda s: float(h(theta, np.float64(bi), np.float64(s))),
                                0.0, a[idx], epsabs=1e-14, epsrel=1e-12, limit=200)
        out[idx] = val
    return out


def _gauss_cdf(theta, a, b):
    return _cdf_by_quadrature(_gauss_h, theta, a, b)


def _t_cdf(theta, a, b):
    return _cdf_by_quadrature(_t_h, theta, a, b)


_CDF = {"I": _indep_cdf, "N": _gauss_cdf, "t": _t_cdf, "C": _clayton_cdf,
        "G": _gumbel_cdf, "F": _frank_cdf, "BB1": _bb1_cdf, "BB8": _bb8_cdf}
_LOGPDF = {"I": _indep_logpdf, "N": _gauss_logpdf, "t": _t_logpdf, "C": _clayton_logpdf,
           "G": _gumbel_logpdf, "F": _frank_logpdf, "BB1": _bb1_logpdf, "BB8": _bb8_logpdf}
_H = {"I": _indep_h, "N": _gauss_h, "t": _t_h, "C": _clayton_h,
      "G": _gumbel_h, "F": _frank_h, "BB1": _bb1_h, "BB8": _bb8_h}
_HINV = {"I": _indep_hinv, "N": _gauss_hinv, "t": _t_hinv, "C": _clayton_hinv,
         "G": _gumbel_hinv, "F": _frank_hinv}


def cdf(kind, theta, a, b):
    return _CDF[kind](theta, a, b)


def logpdf(kind, theta, a, b):
    return _LOGPDF[kind](theta, a, b)


def hfunc(kind, theta, a, b):
    """Conditional distribution ``P(U1 <= a | U2 = b)``."""
    return _H[kind](theta, a, b)


def _gauss_all(theta, a, b):
    rho = theta[0]
    x = special.ndtri(a)
    y = special.ndtri(b)
    r2 = 1.0 - rho * rho
    lp = -0.5 * np.log(r2) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2)
    sr = np.sqrt(r2)
    return lp, special.ndtr((x - rho * y) / sr), special.ndtr((y - rho * x) / sr)


def _t_all(theta, a, b):
    rho, nu = theta
    x = t_ppf(nu, a)
    y = t_ppf(nu, b)
    r2 = 1.0 - rho * rho
    q = (x * x + y * y - 2.0 * rho * x * y) / (nu * r2)
    log2 = (special.gammaln((nu + 2.0) / 2.0) - special.gammaln(nu / 2.0)
            - np.log(nu) - _LOG_PI - 0.5 * np.log(r2)
            - (nu + 2.0) / 2.0 * np.log1p(q))
    c1 = special.gammaln((nu + 1.0) / 2.0) - special.gammaln(nu / 2.0) - 0.5 * (np.log(nu) + _LOG_PI)
    log1 = 2.0 * c1 - (nu + 1.0) / 2.0 * (np.log1p(x * x / nu) + np.log1p(y * y / nu))
    k = r2 / (nu + 1.0)
    ha = special.stdtr(nu + 1.0, (x - rho * y) / np.sqrt((nu + y * y) * k))
    hb = special.stdtr(nu + 1.0, (y - rho * x) / np.sqrt((nu + x * x) * k))
    return log2 - log1, ha, hb


_ALL = {"N": _gauss_all, "t": _t_all}


def evaluate(kind, theta, a, b):
    """``(logpdf(a, b), h(a | b), h(b | a))`` sharing intermediate work."""
    fn = _ALL.get(kind)
    if fn is not None:
        return fn(theta, a, b)
    return _LOGPDF[kind](theta, a, b), _H[kind](theta, a, b), _H[kind](theta, b, a)


def hinv(kind, theta, p, b):
    """Inverse of :func:`hfunc` in its first argument, or ``None`` if the
    family has no closed form and a numerical search is required."""
    fn = _HINV.get(kind)
    if fn is None:
        return None
    return fn(theta, p, b)
