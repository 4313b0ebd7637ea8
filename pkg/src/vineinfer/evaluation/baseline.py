"""Per-variable linear-regression cross prediction with constant-width intervals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from ..exceptions import InputError

__all__ = ["LinearBaseline", "linear_baseline_fit", "linear_baseline_predict"]


@dataclass(frozen=True)
class LinearBaseline:
    """``coef[j]`` holds intercept then slopes for variable ``j`` on the others."""

    coef: tuple
    resid_sd: np.ndarray
    log_transform: bool = False


def linear_baseline_fit(train, log_transform: bool = False) -> LinearBaseline:
    x = np.asarray(train, dtype=float)
    if log_transform:
        if np.any(x <= 0):
            raise InputError("log transform needs positive data")
        x = np.log(x)
    n, d = x.shape
    coefs, sds = [], []
    for j in range(d):
        design = np.column_stack([np.ones(n), np.delete(x, j, axis=1)])
        if np.linalg.matrix_rank(design) < design.shape[1]:
            raise InputError(f"rank-deficient design for variable {j + 1}")
        beta, *_ = np.linalg.lstsq(design, x[:, j], rcond=None)
        resid = x[:, j] - design @ beta
        coefs.append(beta)
        sds.append(np.sqrt(resid @ resid / (n - design.shape[1])))
    return LinearBaseline(tuple(coefs), np.asarray(sds), log_transform)


def linear_baseline_predict(model: LinearBaseline, test, alpha: float = 0.2):
    """Return ``(point, lower, upper)``, each ``(n, d)``.

    Intervals are ``point +- z_{1-alpha/2} * residual_sd``; under the log
    variant everything is computed on the log scale and exponentiated.
    """
    x = np.asarray(test, dtype=float)
    if model.log_transform:
        x = np.log(x)
    n, d = x.shape
    zq = special.ndtri(1.0 - alpha / 2.0)
    point = np.empty((n, d))
    for j in range(d):
        design = np.column_stack([np.ones(n), np.delete(x, j, axis=1)])
        point[:, j] = design @ model.coef[j]
    lower = point - zq * model.resid_sd
    upper = point + zq * model.resid_sd
    if model.log_transform:
        point, lower, upper = np.exp(point), np.exp(lower), np.exp(upper)
    return point, lower, upper
