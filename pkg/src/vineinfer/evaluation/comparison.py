"""Repeated train/test comparison of cross-prediction methods."""

from __future__ import annotations

import concurrent.futures as cf
from dataclasses import dataclass, field

import numpy as np

from ..copula.bivariate import CopulaFamily
from ..fit import DEFAULT_CANDIDATES, fit_vine, refit_families
from ..infer import PredictionRequest, cross_predict
from ..margins.pipeline import LogNormalMargin, NormalMargin, ParametricMargins
from ..margins.skewt import fit_skewt
from .baseline import linear_baseline_fit, linear_baseline_predict
from .scenarios import Scenario, generate_scenario, get_scenario
from .scores import score_predictions

__all__ = ["METHODS", "ComparisonResult", "run_comparison", "predict_method"]

METHODS = ("linear", "linear-log", "gaussian-copula", "vine-copula")


class _SkewtFamily:
    @staticmethod
    def fit(x):
        return fit_skewt(x)


def _margin_family(source):
    if isinstance(source, Scenario):
        return NormalMargin if source.margin == "normal" else LogNormalMargin
    return _SkewtFamily


def predict_method(method, train, test, alpha, margin_family=NormalMargin, candidates=DEFAULT_CANDIDATES,
                   cache=None):
    """Fit ``method`` on ``train`` and return ``(point, lower, upper)`` for ``test``.

    ``cache`` (a dict) lets the Gaussian copula reuse the vine's array.
    """
    cache = {} if cache is None else cache
    if method in ("linear", "linear-log"):
        model = linear_baseline_fit(train, log_transform=method == "linear-log")
        return linear_baseline_predict(model, test, alpha)
    if method not in ("gaussian-copula", "vine-copula"):
        raise ValueError(f"unknown method {method!r}")
    if "margins" not in cache:
        cache["margins"] = ParametricMargins.fit(train, margin_family)
    margins = cache["margins"]
    u = margins.cdf(train)
    if method == "vine-copula" or "vine" not in cache:
        cache["vine"] = fit_vine(u, candidates=candidates) if "vine" not in cache else cache["vine"]
    model = cache["vine"]
    if method == "gaussian-copula":
        model = refit_families(model, u, lambda level, col, cop: CopulaFamily("N"))
        cache["gaussian"] = model
    req = PredictionRequest(test, (alpha / 2.0, 0.5, 1.0 - alpha / 2.0))
    res = cross_predict(model, margins, req)
    return res.values[:, :, 1], res.values[:, :, 0], res.values[:, :, 2]


@dataclass
class ComparisonResult:
    """Scores per repetition and method.

    ``scores[m]`` is ``(reps, 3)`` holding averaged MAE, RMSE and IS;
    ``per_variable[m]`` is ``(reps, d, 3)``; failed fits leave NaN rows and
    an entry in ``failures``.
    """

    methods: tuple
    alpha: float
    scores: dict
    per_variable: dict
    widths: dict
    failures: dict
    predictions: list = field(default_factory=list)
    models: list = field(default_factory=list)

    @property
    def reps(self) -> int:
        return next(iter(self.scores.values())).shape[0]

    def summary(self) -> dict:
        out = {}
        for m in self.methods:
            s = self.scores[m]
            ok = ~np.isnan(s[:, 0])
            out[m] = {
                "mae": float(np.mean(s[ok, 0])) if ok.any() else float("nan"),
                "mae_sd": float(np.std(s[ok, 0], ddof=1)) if ok.sum() > 1 else float("nan"),
                "rmse": float(np.mean(s[ok, 1])) if ok.any() else float("nan"),
                "rmse_sd": float(np.std(s[ok, 1], ddof=1)) if ok.sum() > 1 else float("nan"),
                "is": float(np.mean(s[ok, 2])) if ok.any() else float("nan"),
                "is_sd": float(np.std(s[ok, 2], ddof=1)) if ok.sum() > 1 else float("nan"),
                "failed": int((~ok).sum()),
            }
        return out

    def wins(self, better: str, worse: str, metric: str = "is") -> int:
        k = {"mae": 0, "rmse": 1, "is": 2}[metric]
        return int(np.sum(self.scores[better][:, k] < self.scores[worse][:, k]))

    def pooled_widths(self, method: str) -> np.ndarray:
        w = self.widths.get(method, [])
        return np.concatenate([x.ravel() for x in w]) if w else np.zeros(0)

    def table_rows(self) -> list:
        rows = []
        for m, s in self.summary().items():
            rows.append({"method": m, **s})
        return rows


def _one_rep(args):
    rep, source, methods, n_train, n_test, alpha, candidates, seq, keep = args
    data_seed, split_seed = seq.spawn(2)
    if isinstance(source, Scenario):
        data = generate_scenario(source, n_train + n_test, seed=np.random.default_rng(data_seed))
    else:
        data = source
    rng = np.random.default_rng(split_seed)
    idx = rng.permutation(data.shape[0])[: n_train + n_test]
    train, test = data[idx[:n_train]], data[idx[n_train:]]
    cache = {}
    out = {}
    for m in methods:
        try:
            point, lo, hi = predict_method(m, train, test, alpha, _margin_family(source), candidates, cache)
            rep_scores = score_predictions(point, lo, hi, test, alpha)
            out[m] = (rep_scores, (point, lo, hi) if keep else None, None)
        except Exception as exc:  # a failing method must not stop the study
            out[m] = (None, None, f"{type(exc).__name__}: {exc}")
    models = {k: cache[k] for k in ("vine", "gaussian") if k in cache} if keep else {}
    return rep, out, (test if keep else None), models


def run_comparison(source, methods=("linear", "gaussian-copula", "vine-copula"), reps: int = 100,
                   split=(800, 200), seed=0, alpha: float = 0.2, candidates=DEFAULT_CANDIDATES,
                   workers: int = 1, keep_predictions: bool = False) -> ComparisonResult:
    """Repeat split, fit, predict and score.

    ``source`` is a scenario case number, a :class:`Scenario` (fresh data of
    size ``sum(split)`` per repetition) or an ``(n, d)`` dataset (fresh random
    split per repetition).  Copula methods use the conditional median and the
    ``alpha/2``, ``1 - alpha/2`` conditional quantiles; margins are fitted
    normal or lognormal for scenarios and skewed t for datasets.
    """
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; choose from {METHODS}")
    if isinstance(source, (int, np.integer)):
        source = get_scenario(int(source))
    elif not isinstance(source, Scenario):
        source = np.asarray(source, dtype=float)
    n_train, n_test = split
    seqs = np.random.SeedSequence(seed).spawn(reps)
    jobs = [(r, source, tuple(methods), n_train, n_test, alpha, candidates, seqs[r], keep_predictions)
            for r in range(reps)]
    if workers > 1:
        with cf.ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_one_rep, jobs))
    else:
        results = [_one_rep(j) for j in jobs]
    results.sort(key=lambda r: r[0])
    d = source.d if isinstance(source, Scenario) else source.shape[1]
    scores = {m: np.full((reps, 3), np.nan) for m in methods}
    per_var = {m: np.full((reps, d, 3), np.nan) for m in methods}
    widths = {m: [] for m in methods}
    failures = {m: [] for m in methods}
    preds, models = [], []
    for rep, out, test, mdl in results:
        rec = {"test": test}
        for m in methods:
            sr, pr, err = out[m]
            if sr is None:
                failures[m].append((rep, err))
                continue
            scores[m][rep] = (sr.mean_mae, sr.mean_rmse, sr.mean_is)
            per_var[m][rep] = np.column_stack([sr.mae, sr.rmse, sr.interval])
            widths[m].append(sr.widths)
            rec[m] = pr
        if keep_predictions:
            preds.append(rec)
            models.append(mdl)
    return ComparisonResult(tuple(methods), alpha, scores, per_var, widths, failures, preds, models)
