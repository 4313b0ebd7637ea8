"""Bivariate dependence summaries: normal-score semi-correlations and tail-weighted zeta."""

from __future__ import annotations

import numpy as np
from scipy import special, stats

from ..exceptions import InputError

__all__ = ["semi_correlations", "tail_weighted_zeta", "normal_scores"]


def normal_scores(u):
    return special.ndtri(np.clip(np.asarray(u, dtype=float), 1e-10, 1 - 1e-10))


def semi_correlations(scores, min_quadrant: int = 10) -> tuple:
    """``(rho_N, rho_N_lower, rho_N_upper)`` of normal-score pairs.

    The lower (upper) value is the correlation among points with both
    coordinates negative (positive).
    """
    z = np.asarray(scores, dtype=float)
    if z.ndim != 2 or z.shape[1] != 2:
        raise InputError("need an (n, 2) matrix of normal scores")
    if z.shape[0] < 100:
        raise InputError("need at least 100 pairs")
    lower = (z[:, 0] < 0) & (z[:, 1] < 0)
    upper = (z[:, 0] > 0) & (z[:, 1] > 0)
    if lower.sum() < min_quadrant or upper.sum() < min_quadrant:
        raise InputError(f"fewer than {min_quadrant} points in a joint quadrant")

    def corr(m):
        a, b = z[m, 0], z[m, 1]
        if np.std(a) == 0 or np.std(b) == 0:
            return 1.0 if np.allclose(a - a.mean(), b - b.mean()) else 0.0
        return float(np.corrcoef(a, b)[0, 1])

    return corr(np.ones(len(z), bool)), corr(lower), corr(upper)


def tail_weighted_zeta(sample, alpha: float, tail: str = "upper") -> float:
    """Tail-weighted dependence ``zeta = 2 - vartheta`` of u-score pairs.

    ``vartheta = (a + a(1+a) v) / (a - (1+a) v)`` with
    ``v = E|U1^a - U2^a| / 2``; the lower tail uses ``(1 - U1, 1 - U2)``.
    """
    if not alpha > 0:
        raise InputError("alpha must be positive")
    u = np.asarray(sample, dtype=float)
    if u.ndim != 2 or u.shape[1] != 2:
        raise InputError("need an (n, 2) matrix of u-scores")
    if tail == "lower":
        u = 1.0 - u
    elif tail != "upper":
        raise ValueError("tail must be 'upper' or 'lower'")
    v = 0.5 * np.mean(np.abs(u[:, 0] ** alpha - u[:, 1] ** alpha))
    theta = (alpha + alpha * (1 + alpha) * v) / (alpha - (1 + alpha) * v)
    return float(2.0 - theta)
