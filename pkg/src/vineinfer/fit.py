"""Sequential family selection, fitted vine models and the joint copula density."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .copula.bivariate import BivariateCopula, CopulaFamily, Reflection, clamp
from .copula.fit import EdgeFit, fit_edge_mle, information_criteria, sample_tau
from .exceptions import FitError, InputError, SelectionError
from .vine import VineArray, array_from_edges, edges_of, learn_structure_mst, validate_array

__all__ = [
    "DEFAULT_CANDIDATES",
    "APPLICATION_CANDIDATES",
    "VineModel",
    "select_edge_family",
    "fit_vine",
    "vine_copula_density",
    "forward_pass",
    "model_report",
    "parse_candidates",
    "refit_families",
    "format_report",
]


def _with_reflections(kinds, reflect):
    out = []
    for k in kinds:
        out.append(CopulaFamily(k))
        if k in reflect:
            out.extend(CopulaFamily(k, r) for r in (Reflection.SURVIVAL, Reflection.FIRST, Reflection.SECOND))
    return tuple(out)


# Gaussian, t and Frank are closed under reflection (up to the parameter sign),
# so only the asymmetric families get reflected copies.
DEFAULT_CANDIDATES = _with_reflections(("N", "t", "C", "G", "F", "BB1"), {"C", "G", "BB1"})
APPLICATION_CANDIDATES = _with_reflections(("N", "t", "C", "G", "F", "BB1", "BB8"), {"C", "G", "BB1", "BB8"})


def parse_candidates(spec) -> tuple:
    """Turn ``"N,t,C"`` style strings, codes or families into a family tuple.

    A bare asymmetric kind expands to itself plus its three reflections;
    ``"default"`` and ``"application"`` name the built-in sets.
    """
    if isinstance(spec, str):
        key = spec.strip().lower()
        if key == "default":
            return DEFAULT_CANDIDATES
        if key == "application":
            return APPLICATION_CANDIDATES
        spec = [s.strip() for s in spec.split(",") if s.strip()]
    out = []
    for item in spec:
        if isinstance(item, CopulaFamily):
            fams = [item]
        elif "." not in item and item in ("C", "G", "BB1", "BB8"):
            fams = list(_with_reflections((item,), {item}))
        else:
            fams = [CopulaFamily.from_code(item)]
        for f in fams:
            if f not in out:
                out.append(f)
    if not out:
        raise ValueError("empty candidate list")
    return tuple(out)


_POSITIVE_ONLY = {"C", "G", "BB1", "BB8"}


def _sign_compatible(family: CopulaFamily, tau: float) -> bool:
    if family.kind not in _POSITIVE_ONLY or tau == 0.0:
        return True
    return (tau < 0) == family.reflection.negates


def select_edge_family(pairs, candidates=DEFAULT_CANDIDATES, criterion: str = "aic") -> EdgeFit:
    """Fit each candidate and keep the one with the smallest AIC or BIC.

    Families that can only express one sign of dependence are skipped when
    that sign disagrees with the sample Kendall's tau (unless that would
    leave nothing to fit).  Ties go to fewer parameters, then list order.

    Raises
    ------
    SelectionError
        Every candidate failed; ``failures`` maps family code to message.
    """
    pairs = np.asarray(pairs, dtype=float)
    criterion = criterion.lower()
    if criterion not in ("aic", "bic"):
        raise ValueError(f"criterion must be 'aic' or 'bic', got {criterion!r}")
    candidates = parse_candidates(candidates) if not isinstance(candidates, tuple) else candidates
    if pairs.ndim != 2 or pairs.shape[1] != 2 or pairs.shape[0] < 30:
        raise InputError("need at least 30 pairs with two columns")
    tau = sample_tau(pairs[:, 0], pairs[:, 1])
    pool = [f for f in candidates if _sign_compatible(f, tau)] or list(candidates)
    best, failures = None, {}
    for order, fam in enumerate(pool):
        try:
            fit = fit_edge_mle(fam, pairs, tau=tau)
        except (FitError, ArithmeticError, ValueError) as exc:
            failures[fam.code] = str(exc)
            continue
        rank = (fit.criterion(criterion), fam.nparams, order)
        if best is None or rank < best[0]:
            best = (rank, fit)
    if best is None:
        raise SelectionError("every candidate family failed to fit", failures=failures)
    return best[1]


def forward_pass(array: VineArray, copulas: dict, u, top_h: bool = False):
    """Run the h-function recursion over all edges.

    Returns ``(log_density, conditionals)`` where ``conditionals`` maps
    ``(label, frozenset(conditioning))`` to ``F(label | conditioning)``.
    Outputs of the top-tree edge are only computed when ``top_h`` is set.
    """
    u = np.atleast_2d(np.asarray(u, dtype=float))
    d = array.d
    cond = {(v, frozenset()): clamp(u[:, v - 1]) for v in range(1, d + 1)}
    logd = np.zeros(u.shape[0])
    for level, col in array.slots():
        e = array.edge(level, col)
        s = e.cond_set
        x, y = cond[(e.var_a, s)], cond[(e.var_b, s)]
        cop = copulas[(level, col)]
        need_h = level < d - 1 or top_h
        if cop.kind == "I":
            h1, h2 = x, y
        elif need_h:
            lp, h1, h2 = cop.evaluate(x, y)
            logd = logd + lp
        else:
            logd = logd + cop.logpdf(x, y)
        if need_h:
            cond[(e.var_a, s | {e.var_b})] = clamp(h1)
            cond[(e.var_b, s | {e.var_a})] = clamp(h2)
    return logd, cond


@dataclass(frozen=True)
class VineModel:
    """A vine array with one pair-copula per edge slot.

    ``copulas`` and ``edge_fits`` are keyed by 1-based ``(level, column)``;
    ``edge_fits`` is empty for models specified by hand rather than fitted.
    """

    array: VineArray
    copulas: dict
    edge_fits: dict = field(default_factory=dict)
    n: int = 0

    def __post_init__(self):
        slots = set(self.array.slots())
        if set(self.copulas) != slots:
            raise ValueError(f"need exactly {len(slots)} edge copulas keyed by (level, column)")

    @property
    def d(self) -> int:
        return self.array.d

    @classmethod
    def from_matrices(cls, array, families, params) -> "VineModel":
        """Build from upper-triangular family and parameter matrices.

        ``families[l - 1][j - 1]`` and ``params[l - 1][j - 1]`` (1-based
        ``l < j``) give the copula of slot ``(l, j)``; parameters may be a
        scalar or a sequence.
        """
        array = validate_array(array)
        cops = {}
        for level, col in array.slots():
            fam = families[level - 1][col - 1]
            th = params[level - 1][col - 1]
            th = () if th is None else tuple(np.atleast_1d(th).astype(float))
            cops[(level, col)] = BivariateCopula(CopulaFamily.from_code(fam) if isinstance(fam, str) else fam, th)
        return cls(array, cops)

    @classmethod
    def independence(cls, d: int) -> "VineModel":
        from .vine import dvine_array

        arr = dvine_array(range(1, d + 1))
        return cls(arr, {s: BivariateCopula.independence() for s in arr.slots()})

    # -- statistics -----------------------------------------------------------

    @property
    def nparams(self) -> int:
        return sum(c.nparams for c in self.copulas.values())

    @property
    def loglik(self) -> float:
        if not self.edge_fits:
            return float("nan")
        return float(sum(f.loglik for f in self.edge_fits.values()))

    @property
    def aic(self) -> float:
        return information_criteria(self.loglik, self.nparams, max(self.n, 1))[0]

    @property
    def bic(self) -> float:
        return information_criteria(self.loglik, self.nparams, max(self.n, 1))[1]

    # -- evaluation -----------------------------------------------------------

    def logpdf(self, u) -> np.ndarray:
        return forward_pass(self.array, self.copulas, u)[0]

    def pdf(self, u) -> np.ndarray:
        return np.exp(self.logpdf(u))

    def edge_keyed(self) -> dict:
        """Copulas keyed by ``(frozenset(conditioned), frozenset(conditioning))``
        with the orientation ``(var_a, var_b)`` they expect."""
        out = {}
        for (level, col), cop in self.copulas.items():
            e = self.array.edge(level, col)
            out[e.key] = ((e.var_a, e.var_b), cop, self.edge_fits.get((level, col)))
        return out

    def reencode(self, array) -> "VineModel":
        """The same vine written with a different array of identical edge sets."""
        array = validate_array(array)
        keyed = self.edge_keyed()
        cops, fits = {}, {}
        for level, col in array.slots():
            e = array.edge(level, col)
            try:
                (xa, _), cop, fit = keyed[e.key]
            except KeyError as exc:
                raise ValueError(f"edge {e.label()} is not part of this vine") from exc
            flip = xa != e.var_a
            cops[(level, col)] = cop.swapped() if flip else cop
            if fit is not None:
                fits[(level, col)] = fit.swapped() if flip else fit
        return VineModel(array, cops, fits, self.n)

    def _edge_sets(self):
        return [[(e.conditioned, e.cond_set) for e in lvl] for lvl in edges_of(self.array)]

    def reroot(self, var: int) -> "VineModel":
        """Equivalent model whose array has ``var`` in column 1."""
        if self.array.entry(1, 1) == var:
            return self
        arr = array_from_edges(self.d, self._edge_sets(), avoid_last=var)
        return self.reencode(arr)

    def with_last(self, var: int) -> "VineModel":
        """Equivalent model whose array has ``var`` at ``a_dd``; ``var`` must
        be a conditioned variable of the top-tree edge."""
        if self.array.entry(self.d, self.d) == var:
            return self
        arr = array_from_edges(self.d, self._edge_sets(), force_last=var)
        return self.reencode(arr)

    def last_tree_vars(self) -> tuple:
        e = self.array.edge(self.d - 1, self.d)
        return (e.var_a, e.var_b)

    # -- persistence ----------------------------------------------------------

    def to_dict(self) -> dict:
        d = self.d
        fam = [[None] * d for _ in range(d)]
        par = [[None] * d for _ in range(d)]
        aic = [[None] * d for _ in range(d)]
        ll = [[None] * d for _ in range(d)]
        for (level, col), cop in self.copulas.items():
            fam[level - 1][col - 1] = cop.code
            par[level - 1][col - 1] = list(cop.theta)
            fit = self.edge_fits.get((level, col))
            if fit is not None:
                aic[level - 1][col - 1] = fit.aic
                ll[level - 1][col - 1] = fit.loglik
        return {
            "d": d,
            "n": self.n,
            "array": self.array.to_rows(),
            "families": fam,
            "parameters": par,
            "edge_aic": aic,
            "edge_loglik": ll,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "VineModel":
        arr = VineArray.from_rows(doc["array"])
        model = cls.from_matrices(arr, doc["families"], doc["parameters"])
        fits = {}
        n = int(doc.get("n", 0))
        lls = doc.get("edge_loglik")
        if lls is not None and n > 0:
            for level, col in arr.slots():
                val = lls[level - 1][col - 1]
                if val is not None:
                    fits[(level, col)] = EdgeFit.from_loglik(model.copulas[(level, col)], val, n)
        return cls(arr, model.copulas, fits, n)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "VineModel":
        return cls.from_dict(json.loads(text))


def vine_copula_density(model: VineModel, u):
    """Joint copula density of ``model`` at one point or at each row of ``u``."""
    arr = np.asarray(u, dtype=float)
    out = model.pdf(np.atleast_2d(arr))
    return float(out[0]) if arr.ndim == 1 else out


def _check_uscores(u, d=None):
    u = np.asarray(u, dtype=float)
    if u.ndim != 2:
        raise InputError("u-scores must be an (n, d) matrix")
    if d is not None and u.shape[1] != d:
        raise InputError(f"expected {d} columns, got {u.shape[1]}")
    if not np.all(np.isfinite(u)) or np.any((u <= 0.0) | (u >= 1.0)):
        raise InputError("u-scores must lie strictly inside (0, 1)")
    return u


def fit_vine(uscores, array=None, candidates=DEFAULT_CANDIDATES, criterion: str = "aic") -> VineModel:
    """Fit pair-copulas tree by tree.

    With ``array=None`` the structure is learned by maximum spanning trees
    (the edges being fitted as each tree is built); otherwise the given
    array is used.  Level-``l`` pseudo-observations come from the h-functions
    of the fitted level-``l - 1`` copulas.

    Raises
    ------
    FitError
        With ``where=(level, column)`` of the failing edge.  During structure
        learning the column is not yet known: ``where`` is ``(level, None)``
        and ``edge`` holds the conditioned pair and conditioning set.
    """
    candidates = parse_candidates(candidates) if not isinstance(candidates, tuple) else candidates
    u = _check_uscores(uscores)
    n, d = u.shape

    def fit_edge(pairs):
        return select_edge_family(pairs, candidates, criterion)

    if array is None:
        learned = learn_structure_mst(u, fit_edge=fit_edge)
        arr = learned.array
        cops, fits = {}, {}
        for level, col in arr.slots():
            e = arr.edge(level, col)
            (x, _), fit = learned.edge_fits[e.key]
            if x != e.var_a:
                fit = fit.swapped()
            cops[(level, col)] = fit.copula
            fits[(level, col)] = fit
        return VineModel(arr, cops, fits, n)

    arr = validate_array(array)
    if arr.d != d:
        raise InputError(f"array has dimension {arr.d} but data has {d} columns")
    cond = {(v, frozenset()): u[:, v - 1] for v in range(1, d + 1)}
    cops, fits = {}, {}
    for level, col in arr.slots():
        e = arr.edge(level, col)
        s = e.cond_set
        x, y = cond[(e.var_a, s)], cond[(e.var_b, s)]
        try:
            fit = fit_edge(np.column_stack([x, y]))
        except FitError as exc:
            exc.where = (level, col)
            raise
        cops[(level, col)] = fit.copula
        fits[(level, col)] = fit
        if level < d - 1:
            cond[(e.var_a, s | {e.var_b})] = clamp(fit.copula.h1(x, y))
            cond[(e.var_b, s | {e.var_a})] = clamp(fit.copula.h2(x, y))
    return VineModel(arr, cops, fits, n)


def refit_families(model: VineModel, uscores, family_of=None) -> VineModel:
    """Refit ``model``'s array with one fixed family per edge.

    ``family_of(level, column, copula) -> CopulaFamily`` picks the family;
    by default each edge keeps its current family.
    """
    u = _check_uscores(uscores, model.d)
    arr = model.array
    cond = {(v, frozenset()): u[:, v - 1] for v in range(1, model.d + 1)}
    cops, fits = {}, {}
    for level, col in arr.slots():
        e = arr.edge(level, col)
        s = e.cond_set
        x, y = cond[(e.var_a, s)], cond[(e.var_b, s)]
        fam = model.copulas[(level, col)].family if family_of is None else family_of(level, col, model.copulas[(level, col)])
        fit = fit_edge_mle(fam, np.column_stack([x, y]))
        cops[(level, col)] = fit.copula
        fits[(level, col)] = fit
        if level < model.d - 1:
            cond[(e.var_a, s | {e.var_b})] = clamp(fit.copula.h1(x, y))
            cond[(e.var_b, s | {e.var_a})] = clamp(fit.copula.h2(x, y))
    return VineModel(arr, cops, fits, u.shape[0])


def model_report(model: VineModel) -> dict:
    """Family-code, parameter and per-edge AIC tables.

    Each table is a list of ``d - 1`` rows; row ``l`` holds the entries for
    columns ``l + 1 .. d``.
    """
    d = model.d
    fam, par, aic = [], [], []
    for level in range(1, d):
        fr, pr, ar = [], [], []
        for col in range(level + 1, d + 1):
            cop = model.copulas[(level, col)]
            fr.append(cop.code)
            pr.append(tuple(cop.theta))
            fit = model.edge_fits.get((level, col))
            ar.append(None if fit is None else fit.aic)
        fam.append(fr)
        par.append(pr)
        aic.append(ar)
    return {
        "array": model.array.to_rows(),
        "families": fam,
        "parameters": par,
        "edge_aic": aic,
        "loglik": model.loglik,
        "aic": model.aic,
        "bic": model.bic,
    }


def format_report(model: VineModel) -> str:
    """Plain-text rendering of :func:`model_report`."""
    rep = model_report(model)
    d = model.d
    lines = ["vine array:"]
    for i, row in enumerate(rep["array"]):
        lines.append("  " + "      " * i + "".join(f"{x:>6d}" for x in row))
    lines.append("families:")
    for i, row in enumerate(rep["families"]):
        lines.append("  " + "        " * (i + 1) + "".join(f"{x:>8s}" for x in row))
    lines.append("parameters:")
    for i, row in enumerate(rep["parameters"]):
        cells = [("(" + ",".join(f"{t:.3g}" for t in p) + ")") if p else "-" for p in row]
        lines.append("  " + "              " * (i + 1) + "".join(f"{c:>14s}" for c in cells))
    lines.append("edge AIC:")
    for i, row in enumerate(rep["edge_aic"]):
        cells = ["-" if a is None else f"{a:.2f}" for a in row]
        lines.append("  " + "          " * (i + 1) + "".join(f"{c:>10s}" for c in cells))
    lines.append(f"loglik {rep['loglik']:.3f}  AIC {rep['aic']:.3f}  BIC {rep['bic']:.3f}  (d={d})")
    return "\n".join(lines)
