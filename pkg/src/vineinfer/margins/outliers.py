"""Isolated-outlier detection and sum-preserving smoothing of differenced series."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import InputError

__all__ = ["Outlier", "SmoothingResult", "find_outliers", "smooth_outliers"]


@dataclass(frozen=True)
class Outlier:
    row: int
    column: int
    boundary: bool = False


@dataclass(frozen=True)
class SmoothingResult:
    data: np.ndarray
    outliers: list


def find_outliers(diffs, flag_sd: float = 3.0, quiet_sd: float = 2.0) -> list:
    """Cells beyond ``flag_sd`` standard deviations while every other column
    of the same row stays within ``quiet_sd``."""
    x = np.asarray(diffs, dtype=float)
    if x.ndim != 2 or x.shape[0] < 3:
        raise InputError("need an (n, d) matrix with n >= 3")
    sd = x.std(axis=0, ddof=1)
    if np.any(sd == 0.0):
        raise InputError(f"zero-variance column {int(np.argmax(sd == 0.0)) + 1}")
    z = np.abs((x - x.mean(axis=0)) / sd)
    out = []
    d = x.shape[1]
    for t, j in zip(*np.nonzero(z > flag_sd)):
        others = np.delete(z[t], j) if d > 1 else np.zeros(0)
        if np.all(others <= quiet_sd):
            out.append(Outlier(int(t), int(j), bool(t == 0 or t == x.shape[0] - 1)))
    return sorted(out, key=lambda o: (o.row, o.column))


def smooth_outliers(diffs, seed=None, flag_sd: float = 3.0, quiet_sd: float = 2.0) -> SmoothingResult:
    """Replace each flagged spike and its neighbours by a noisy flat segment.

    A flagged cell at row ``t`` of column ``j`` has the triple ``(t-1, t, t+1)``
    replaced by ``(m - e1, m + e1 + e2, m - e2)`` where ``m`` is the triple's
    mean and ``e1, e2`` are normal with standard deviation ``0.1 * sd_j``.  The
    triple's sum is unchanged, so the undifferenced series is intact outside
    it.  Spikes in the first or last row use the available pair
    ``(m - e, m + e)`` and are marked ``boundary``.  Unflagged columns are
    returned unchanged.
    """
    x = np.array(diffs, dtype=float, copy=True)
    flagged = find_outliers(x, flag_sd, quiet_sd)
    rng = np.random.default_rng(seed)
    sd = x.std(axis=0, ddof=1)
    n = x.shape[0]
    for o in flagged:
        t, j = o.row, o.column
        if o.boundary:
            idx = [0, 1] if t == 0 else [n - 2, n - 1]
            m = x[idx, j].mean()
            e = rng.normal(0.0, 0.1 * sd[j])
            x[idx, j] = (m - e, m + e)
        else:
            idx = [t - 1, t, t + 1]
            m = x[idx, j].mean()
            e1, e2 = rng.normal(0.0, 0.1 * sd[j], size=2)
            x[idx, j] = (m - e1, m + e1 + e2, m - e2)
    return SmoothingResult(x, flagged)
