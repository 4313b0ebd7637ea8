"""Point and interval forecast scores, computed per variable and averaged."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import InputError

__all__ = ["ScoreReport", "mae", "rmse", "interval_score", "score_predictions"]


def _pair(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise InputError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.ndim == 1:
        a, b = a[:, None], b[:, None]
    return a, b


def mae(predictions, truths, per_variable: bool = False):
    """Mean absolute error of each column, averaged over columns."""
    p, t = _pair(predictions, truths)
    per = np.mean(np.abs(p - t), axis=0)
    return per if per_variable else float(per.mean())


def rmse(predictions, truths, per_variable: bool = False):
    """Root mean squared error of each column, averaged over columns (mean of roots)."""
    p, t = _pair(predictions, truths)
    per = np.sqrt(np.mean((p - t) ** 2, axis=0))
    return per if per_variable else float(per.mean())


def interval_score(lowers, uppers, truths, alpha: float, per_variable: bool = False):
    """Interval score of central ``100(1 - alpha)%`` intervals.

    ``(u - l) + (2/alpha)(l - x) 1{x < l} + (2/alpha)(x - u) 1{x > u}``,
    averaged over rows, then over columns.
    """
    if not 0.0 < alpha < 1.0:
        raise InputError("alpha must lie strictly inside (0, 1)")
    lo, x = _pair(lowers, truths)
    hi, _ = _pair(uppers, truths)
    if np.any(lo > hi):
        raise InputError("lower bounds exceed upper bounds")
    pen = 2.0 / alpha
    s = (hi - lo) + pen * np.maximum(lo - x, 0.0) + pen * np.maximum(x - hi, 0.0)
    per = s.mean(axis=0)
    return per if per_variable else float(per.mean())


@dataclass(frozen=True)
class ScoreReport:
    """Per-variable scores, their averages and interval widths."""

    mae: np.ndarray
    rmse: np.ndarray
    interval: np.ndarray
    widths: np.ndarray
    alpha: float

    @property
    def mean_mae(self) -> float:
        return float(np.mean(self.mae))

    @property
    def mean_rmse(self) -> float:
        return float(np.mean(self.rmse))

    @property
    def mean_is(self) -> float:
        return float(np.mean(self.interval))

    def summary(self) -> dict:
        return {"mae": self.mean_mae, "rmse": self.mean_rmse, "is": self.mean_is}


def score_predictions(point, lower, upper, truths, alpha: float) -> ScoreReport:
    p, t = _pair(point, truths)
    lo, _ = _pair(lower, truths)
    hi, _ = _pair(upper, truths)
    return ScoreReport(mae(p, t, True), rmse(p, t, True), interval_score(lo, hi, t, alpha, True),
                       hi - lo, alpha)
