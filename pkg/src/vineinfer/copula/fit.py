"""Maximum-likelihood fitting of a single pair-copula."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats

from ..exceptions import CopulaDomainError, FitError, InputError
from .bivariate import BivariateCopula, CopulaFamily, clamp, frank_theta_from_tau

__all__ = ["EdgeFit", "fit_edge_mle", "information_criteria", "FIT_BOUNDS", "sample_tau"]

# Numerical search boxes; wider than these adds nothing at realistic sample sizes.
FIT_BOUNDS = {
    "N": ((-0.9995, 0.9995),),
    "t": ((-0.9995, 0.9995), (2.0, 30.0)),
    "C": ((1e-4, 28.0),),
    "G": ((1.0, 17.0),),
    "F": ((-35.0, 35.0),),
    "BB1": ((1e-4, 7.0), (1.0, 7.0)),
    "BB8": ((1.0, 8.0), (1e-4, 1.0)),
}

_MIN_PAIRS = 30


def information_criteria(loglik: float, k: int, n: int) -> tuple[float, float]:
    """Return ``(aic, bic)`` for a log-likelihood with ``k`` free parameters."""
    return -2.0 * loglik + 2.0 * k, -2.0 * loglik + math.log(n) * k


@dataclass(frozen=True)
class EdgeFit:
    """A fitted pair-copula and its fit statistics."""

    copula: BivariateCopula
    loglik: float
    aic: float
    bic: float
    n: int
    at_boundary: bool = False

    @classmethod
    def from_loglik(cls, copula, loglik, n, at_boundary=False):
        aic, bic = information_criteria(loglik, copula.nparams, n)
        return cls(copula, float(loglik), aic, bic, int(n), bool(at_boundary))

    def criterion(self, name: str) -> float:
        name = name.lower()
        if name == "aic":
            return self.aic
        if name == "bic":
            return self.bic
        raise ValueError(f"unknown criterion {name!r}")

    def swapped(self) -> "EdgeFit":
        return EdgeFit(self.copula.swapped(), self.loglik, self.aic, self.bic, self.n, self.at_boundary)


def sample_tau(u, v) -> float:
    tau = stats.kendalltau(u, v).statistic
    return 0.0 if not np.isfinite(tau) else float(tau)


def _start(family: CopulaFamily, tau: float) -> tuple:
    """Starting parameters from an empirical Kendall's tau."""
    base = -tau if family.reflection.negates else tau
    kind = family.kind
    pos = max(base, 0.02)
    if kind in ("N", "t"):
        rho = float(np.clip(np.sin(np.pi * base / 2.0), -0.95, 0.95))
        return (rho,) if kind == "N" else (rho, 6.0)
    if kind == "C":
        return (min(2.0 * pos / (1.0 - pos), 27.0),)
    if kind == "G":
        return (min(1.0 / (1.0 - pos), 16.0),)
    if kind == "F":
        return (frank_theta_from_tau(float(np.clip(base, -0.85, 0.85))),)
    if kind == "BB1":
        return (0.5, 1.5)
    if kind == "BB8":
        return (1.5, 0.7)
    return ()


def _on_boundary(theta, bounds) -> bool:
    for t, (lo, hi) in zip(theta, bounds):
        span = hi - lo
        if t - lo < 1e-3 * span or hi - t < 1e-3 * span:
            return True
    return False


def fit_edge_mle(family: CopulaFamily, pairs, tau: float | None = None) -> EdgeFit:
    """Fit one pair-copula family by maximum likelihood.

    One-parameter families use bounded Brent minimisation over the search
    box, compared against the Kendall's-tau starting value; two-parameter
    families use Nelder-Mead from that start with a barrier outside the box.

    Parameters
    ----------
    family : CopulaFamily
    pairs : array_like, shape (n, 2)
        u-scores strictly inside (0, 1); at least 30 rows.
    tau : float, optional
        Precomputed sample Kendall's tau of ``pairs``.

    Raises
    ------
    InputError
        Too few pairs or values outside the open unit interval.
    FitError
        The optimiser produced no finite likelihood.
    """
    if isinstance(family, str):
        family = CopulaFamily.from_code(family)
    pairs = np.asarray(pairs, dtype=float)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise InputError("pairs must have shape (n, 2)")
    n = pairs.shape[0]
    if n < _MIN_PAIRS:
        raise InputError(f"need at least {_MIN_PAIRS} pairs, got {n}")
    if np.any((pairs <= 0.0) | (pairs >= 1.0)) or not np.all(np.isfinite(pairs)):
        raise InputError("pairs must lie strictly inside (0, 1)")
    u, v = clamp(pairs[:, 0]), clamp(pairs[:, 1])

    if family.kind == "I":
        return EdgeFit.from_loglik(BivariateCopula.independence(), 0.0, n)

    if tau is None:
        tau = sample_tau(u, v)
    bounds = FIT_BOUNDS[family.kind]

    def negll(theta):
        theta = tuple(theta)
        if family.kind == "F" and abs(theta[0]) < 1e-8:
            theta = (1e-8,)
        for t, (lo, hi) in zip(theta, bounds):
            if not lo <= t <= hi:
                return 1e12
        try:
            cop = BivariateCopula(family, theta)
        except CopulaDomainError:
            return 1e12
        with np.errstate(all="ignore"):
            val = -float(np.sum(cop.logpdf(u, v)))
        return val if np.isfinite(val) else 1e12

    start = _start(family, tau)
    if family.nparams == 1:
        res = optimize.minimize_scalar(lambda t: negll((t,)), bounds=bounds[0],
                                       method="bounded", options={"xatol": 1e-7})
        best_theta, best_val = (float(res.x),), float(res.fun)
        start_val = negll(start)
        if start_val < best_val:
            best_theta, best_val = start, start_val
    else:
        res = optimize.minimize(negll, np.asarray(start, dtype=float), method="Nelder-Mead",
                                options={"xatol": 1e-6, "fatol": 1e-8, "maxiter": 2000})
        best_theta, best_val = tuple(float(t) for t in res.x), float(res.fun)

    if not np.isfinite(best_val) or best_val >= 1e12:
        raise FitError(f"maximum-likelihood fit failed for family {family.code}", family=family.code)
    if family.kind == "F" and abs(best_theta[0]) < 1e-8:
        best_theta = (1e-8,)
    cop = BivariateCopula(family, best_theta)
    return EdgeFit.from_loglik(cop, -best_val, n, _on_boundary(best_theta, bounds))


def standard_errors(copula: BivariateCopula, pairs, rel_step: float = 1e-4) -> np.ndarray:
    """Asymptotic standard errors of ``copula``'s parameters at ``pairs``.

    Inverts a central-difference Hessian of the negative log-likelihood.
    Entries are NaN when the Hessian is not positive definite.
    """
    pairs = np.asarray(pairs, dtype=float)
    u, v = clamp(pairs[:, 0]), clamp(pairs[:, 1])
    theta = np.asarray(copula.theta, dtype=float)
    k = theta.size
    if k == 0:
        return np.empty(0)
    h = rel_step * np.maximum(1.0, np.abs(theta))

    def nll(t):
        return -float(np.sum(BivariateCopula(copula.family, tuple(t)).logpdf(u, v)))

    hess = np.empty((k, k))
    f0 = nll(theta)
    for i in range(k):
        ei = np.eye(k)[i] * h[i]
        hess[i, i] = (nll(theta + ei) - 2.0 * f0 + nll(theta - ei)) / h[i] ** 2
        for j in range(i):
            ej = np.eye(k)[j] * h[j]
            hess[i, j] = hess[j, i] = (nll(theta + ei + ej) - nll(theta + ei - ej)
                                       - nll(theta - ei + ej) + nll(theta - ei - ej)) / (4.0 * h[i] * h[j])
    try:
        np.linalg.cholesky(hess)
    except np.linalg.LinAlgError:
        return np.full(k, np.nan)
    return np.sqrt(np.diag(np.linalg.inv(hess)))
