"""Cross prediction and conditional (stressed) simulation from a fitted vine."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre
from scipy import special

from .copula.bivariate import EPS, clamp
from .exceptions import ConvergenceError, DegenerateConditionalError, InputError, StructureError
from .fit import VineModel, forward_pass
from .vine import tree1_distances

__all__ = [
    "PredictionRequest",
    "PredictionResult",
    "StressSpec",
    "RiskTransferSummary",
    "cond_quantile_last_tree",
    "cond_quantile_integrated",
    "conditional_quantiles",
    "cross_predict",
    "rosenblatt_forward",
    "rosenblatt_inverse",
    "rosenblatt_simulate",
    "risk_transfer_summary",
]

_NODES = 50
_MAX_PANELS = 32
_QUAD_RTOL = 1e-6
_BISECT_WIDTH = 1e-4
_POLISH_RTOL = 1e-8


def _check_q(q):
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if np.any((q <= 0.0) | (q >= 1.0)) or not np.all(np.isfinite(q)):
        raise InputError("quantile levels must lie strictly inside (0, 1)")
    return q


def _rows(u, d):
    u = np.atleast_2d(np.asarray(u, dtype=float))
    if u.shape[1] != d:
        raise InputError(f"expected {d} columns, got {u.shape[1]}")
    return clamp(u)


@dataclass(frozen=True)
class PredictionRequest:
    x_new: np.ndarray
    quantiles: tuple = (0.1, 0.5, 0.9)

    def __post_init__(self):
        q = _check_q(self.quantiles)
        if np.any(np.diff(q) <= 0):
            raise InputError("quantile levels must be strictly increasing")
        object.__setattr__(self, "quantiles", tuple(float(x) for x in q))
        object.__setattr__(self, "x_new", np.atleast_2d(np.asarray(self.x_new, dtype=float)))


@dataclass(frozen=True)
class PredictionResult:
    """``values[i, j, k]``: quantile ``quantiles[k]`` of variable ``j + 1`` for row ``i``."""

    values: np.ndarray
    quantiles: tuple

    def quantile(self, q: float) -> np.ndarray:
        return self.values[:, :, self.quantiles.index(q)]

    @property
    def median(self) -> np.ndarray:
        return self.quantile(0.5)


@dataclass(frozen=True)
class StressSpec:
    conditioned_var: int
    fixed_quantile: float = 0.95
    n_sim: int = 100
    reps: int = 1000

    def __post_init__(self):
        if not 0.0 < self.fixed_quantile < 1.0:
            raise InputError("stress quantile must lie strictly inside (0, 1)")
        if self.n_sim < 1 or self.reps < 1:
            raise InputError("n_sim and reps must be positive")


# -- closed-form path -----------------------------------------------------------

def _hinv_chain(model: VineModel, cond: dict, q: np.ndarray) -> np.ndarray:
    """Invert column ``d`` of ``model``: ``F^{-1}(q | everything else)`` for
    variable ``a_dd``, broadcasting rows of ``cond`` against ``q``."""
    arr, d = model.array, model.d
    w = np.broadcast_to(q, (next(iter(cond.values())).shape[0], q.size)).copy()
    for level in range(d - 1, 0, -1):
        e = arr.edge(level, d)
        x = cond[(e.var_a, e.cond_set)][:, None]
        w = model.copulas[(level, d)].hinv2(np.broadcast_to(x, w.shape), w)
    return clamp(w)


def cond_quantile_last_tree(model: VineModel, u_new, q) -> dict:
    """Conditional quantiles of the two top-tree variables, without integration.

    Returns ``{label: array (n_rows, n_q)}`` for both conditioned variables of
    the top-tree edge.
    """
    q = _check_q(q)
    u = _rows(u_new, model.d)
    out = {}
    for var in model.last_tree_vars():
        m = model.with_last(var)
        _, cond = forward_pass(m.array, m.copulas, u)
        out[var] = _hinv_chain(m, cond, q)
    return out


# -- integration path -------------------------------------------------------------

_GL_X, _GL_W = legendre.leggauss(_NODES)
# Map nodal values on one panel to the coefficients of the antiderivative of the
# degree-49 Legendre interpolant (discrete orthogonality is exact at these nodes).
_TO_COEF = (np.arange(_NODES)[:, None] + 0.5) * legendre.legvander(_GL_X, _NODES - 1).T * _GL_W[None, :]
_ANTI = np.stack([legendre.legint(np.eye(_NODES)[k], lbnd=-1.0) for k in range(_NODES)], axis=1)
_ANTI_FROM_VALUES = _ANTI @ _TO_COEF  # (_NODES + 1, _NODES)
# Integration runs over normal scores z = Phi^{-1}(u) on the clamped range.
_ZMAX = float(-special.ndtri(EPS))


def _panel_nodes(panels: int) -> np.ndarray:
    width = 2.0 * _ZMAX / panels
    left = -_ZMAX + width * np.arange(panels)[:, None]
    return (left + width * (_GL_X[None, :] + 1.0) / 2.0).ravel()


def _log_integrand(model, base, j, z):
    """Log joint density (up to a per-row constant) with ``u_j = Phi(z)``.

    Edges whose variables exclude ``j`` contribute a constant per row and are
    skipped; their conditional outputs come from ``base``, the forward pass
    at the observed rows.
    """
    n, k = next(iter(base.values())).shape[0], z.size
    arr, d = model.array, model.d
    grid = {(j, frozenset()): np.tile(special.ndtr(z), n)}

    def get(key):
        val = grid.get(key)
        return np.repeat(base[key], k) if val is None else val

    logd = np.zeros(n * k)
    for level, col in arr.slots():
        e = arr.edge(level, col)
        s = e.cond_set
        if j != e.var_a and j != e.var_b and j not in s:
            continue
        cop = model.copulas[(level, col)]
        x, y = get((e.var_a, s)), get((e.var_b, s))
        if cop.kind == "I":
            h1, h2 = x, y
        elif level < d - 1:
            lp, h1, h2 = cop.evaluate(x, y)
            logd += lp
        else:
            logd += cop.logpdf(x, y)
        if level < d - 1:
            grid[(e.var_a, s | {e.var_b})] = clamp(h1)
            grid[(e.var_b, s | {e.var_a})] = clamp(h2)
    return logd.reshape(n, k) + (-0.5 * z * z - 0.5 * np.log(2.0 * np.pi))[None, :]


def _panel_cumsums(f, panels):
    half = _ZMAX / panels
    pint = (f.reshape(f.shape[0], panels, _NODES) @ _GL_W) * half
    return np.concatenate([np.zeros((f.shape[0], 1)), np.cumsum(pint, axis=1)], axis=1)


def _integrate_rows(model, u, j):
    """Adaptive composite Gauss-Legendre evaluation of the conditional density.

    The panel count doubles until the cumulative integrals at the coarse
    panel edges agree with the refined ones to a relative ``1e-6`` of the
    total.  Returns per-row panel counts, nodal values scaled by a per-row
    constant and the log of that constant.
    """
    n = u.shape[0]
    panels = np.ones(n, dtype=int)
    fvals = [None] * n
    lognorm = np.zeros(n)
    todo = np.arange(n)
    p = 1
    _, base = forward_pass(model.array, model.copulas, u)
    prev = _log_integrand(model, base, j, _panel_nodes(p))
    while todo.size:
        nxt_p = 2 * p
        sub = {key: val[todo] for key, val in base.items()}
        cur = _log_integrand(model, sub, j, _panel_nodes(nxt_p))
        shift = np.maximum(np.nanmax(prev, axis=1), np.nanmax(cur, axis=1))
        if not np.all(np.isfinite(shift)):
            bad = todo[~np.isfinite(shift)][0]
            raise DegenerateConditionalError(f"conditional density of variable {j} is not finite (row {bad})")
        fp = np.exp(prev - shift[:, None])
        fc = np.exp(cur - shift[:, None])
        cp = _panel_cumsums(fp, p)
        cc = _panel_cumsums(fc, nxt_p)[:, ::2]
        gap = np.max(np.abs(cc - cp), axis=1)
        done = gap <= _QUAD_RTOL * cc[:, -1]
        if nxt_p >= _MAX_PANELS:
            done[:] = True
        for loc in np.flatnonzero(done):
            r = todo[loc]
            panels[r] = nxt_p
            fvals[r] = fc[loc]
            lognorm[r] = shift[loc]
        todo, prev, p = todo[~done], cur[~done], nxt_p
    return panels, fvals, lognorm


def _solve_in_panels(fv: np.ndarray, panels: int, q: np.ndarray) -> np.ndarray:
    """Solve ``N(z) = q * D`` for rows sharing one panel count; returns u-scores."""
    m = fv.shape[0]
    f = fv.reshape(m, panels, _NODES)
    half = _ZMAX / panels
    cum = _panel_cumsums(fv, panels)
    total = cum[:, -1]
    if np.any(total <= 0.0):
        raise DegenerateConditionalError("conditional density integrates to zero")
    target = q[None, :] * total[:, None]                  # (m, nq)
    k = np.clip((cum[:, None, :] <= target[:, :, None]).sum(axis=2) - 1, 0, panels - 1)
    resid = target - np.take_along_axis(cum, k, axis=1)
    coefs = np.einsum("ab,mpb->mpa", _ANTI_FROM_VALUES, f) * half   # (m, panels, NODES+1)
    c = np.take_along_axis(coefs, k[:, :, None], axis=1)           # (m, nq, NODES+1)

    def g(t):
        return np.einsum("mqa,mqa->mq", legendre.legvander(t, _NODES), c) - resid

    def to_z(t):
        return -_ZMAX + 2.0 * half * (k + 0.5 * (t + 1.0))

    lo = np.full(resid.shape, -1.0)
    hi = np.full(resid.shape, 1.0)
    # g is nondecreasing, so bisection keeps a valid bracket; stop at u-width 1e-4.
    while True:
        width_u = special.ndtr(to_z(hi)) - special.ndtr(to_z(lo))
        if np.max(width_u) <= _BISECT_WIDTH:
            break
        mid = 0.5 * (lo + hi)
        pos = g(mid) > 0.0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
    x0, x1 = lo, hi
    f0, f1 = g(lo), g(hi)
    for _ in range(60):
        denom = f1 - f0
        safe = denom != 0.0
        step = np.where(safe, f1 * (x1 - x0) / np.where(safe, denom, 1.0), 0.0)
        x2 = np.clip(x1 - step, lo, hi)
        u1, u2 = special.ndtr(to_z(x1)), special.ndtr(to_z(x2))
        x0, f0 = x1, f1
        x1, f1 = x2, g(x2)
        if np.all(np.abs(u2 - u1) <= _POLISH_RTOL * np.minimum(u2, 1.0 - u2)):
            break
    else:
        raise ConvergenceError("secant polish of the conditional quantile did not converge",
                               bracket=(special.ndtr(to_z(lo)), special.ndtr(to_z(hi))))
    return clamp(special.ndtr(to_z(x1)))


def cond_quantile_integrated(model: VineModel, u_new, j: int, q) -> np.ndarray:
    """Conditional quantiles of variable ``j`` given all others, by quadrature.

    The conditional density of ``u_j`` is proportional to the joint vine
    density.  After the substitution ``u_j = Phi(z)`` its normalising integral
    and partial integrals are computed on composite 50-node Gauss-Legendre
    panels, refined by doubling until successive resolutions agree to a
    relative ``1e-6``.

    Returns
    -------
    ndarray, shape (n_rows, n_q)
    """
    q = _check_q(q)
    if not 1 <= j <= model.d:
        raise InputError(f"variable {j} out of range")
    u = _rows(u_new, model.d)
    panels, fvals, lognorm = _integrate_rows(model, u, j)
    totals = np.array([_panel_cumsums(f[None, :], int(p))[0, -1] for f, p in zip(fvals, panels)])
    if np.any(np.log(np.maximum(totals, 1e-320)) + lognorm < np.log(1e-300)):
        raise DegenerateConditionalError(f"normalising integral for variable {j} is below 1e-300")
    out = np.empty((u.shape[0], q.size))
    for p in np.unique(panels):
        idx = np.flatnonzero(panels == p)
        fv = np.stack([fvals[i] for i in idx])
        out[idx] = _solve_in_panels(fv, int(p), q)
    return out


def conditional_quantiles(model: VineModel, u_new, q, variables=None) -> np.ndarray:
    """Quantiles of every variable given the rest on the copula scale.

    Returns ``(n_rows, d, n_q)``; the two top-tree variables use the
    closed-form chain and the others use quadrature.
    """
    q = _check_q(q)
    u = _rows(u_new, model.d)
    variables = range(1, model.d + 1) if variables is None else variables
    out = np.full((u.shape[0], model.d, q.size), np.nan)
    last = model.last_tree_vars() if model.d >= 2 else ()
    closed = cond_quantile_last_tree(model, u, q) if model.d >= 2 else {}
    for j in variables:
        try:
            out[:, j - 1, :] = closed[j] if j in last else cond_quantile_integrated(model, u, j, q)
        except (ArithmeticError, StructureError) as exc:
            exc.args = (f"variable {j}: {exc.args[0] if exc.args else exc}",) + exc.args[1:]
            raise
    return out


def cross_predict(model: VineModel, margins, request: PredictionRequest) -> PredictionResult:
    """Predict each variable from all others.

    ``margins`` supplies ``cdf(x) -> u`` and ``ppf(u) -> x`` on ``(n, d)``
    matrices; ``None`` keeps everything on the copula scale.
    """
    x = request.x_new
    u = x if margins is None else margins.cdf(x)
    cq = conditional_quantiles(model, u, request.quantiles)
    if margins is None:
        vals = cq
    else:
        n, d, k = cq.shape
        vals = np.stack([margins.ppf(cq[:, :, i]) for i in range(k)], axis=2)
    return PredictionResult(vals, request.quantiles)


# -- Rosenblatt transforms and simulation -------------------------------------------

def rosenblatt_forward(model: VineModel, u) -> np.ndarray:
    """Map u-scores to independent uniforms, column ``j`` of the result being
    ``F(a_jj | a_1j, ..., a_{j-1,j})``."""
    arr, d = model.array, model.d
    u = _rows(u, d)
    _, cond = forward_pass(arr, model.copulas, u, top_h=True)
    p = np.empty_like(u)
    for col in range(1, d + 1):
        p[:, col - 1] = cond[(arr.entry(col, col), arr.cond_set(col, col))]
    return p


def rosenblatt_inverse(model: VineModel, p) -> np.ndarray:
    """Inverse of :func:`rosenblatt_forward`; returns u-scores in label order."""
    arr, d = model.array, model.d
    p = _rows(p, d)
    n = p.shape[0]
    cond = {(arr.entry(1, 1), frozenset()): p[:, 0].copy()}
    for col in range(2, d + 1):
        var = arr.entry(col, col)
        # y[l] = F(var | a_1, ..., a_{l-1} of this column); y[col] is the uniform seed.
        y = {col: p[:, col - 1]}
        for level in range(col - 1, 0, -1):
            e = arr.edge(level, col)
            y[level] = clamp(model.copulas[(level, col)].hinv2(cond[(e.var_a, e.cond_set)], y[level + 1]))
        cond[(var, arr.cond_set(col, col))] = y[col]
        for level in range(1, col):
            e = arr.edge(level, col)
            s = e.cond_set
            cond[(var, s)] = y[level]
            if col < d:
                cond[(e.var_a, s | {var})] = clamp(model.copulas[(level, col)].h1(cond[(e.var_a, s)], y[level]))
    out = np.empty((n, d))
    for v in range(1, d + 1):
        out[:, v - 1] = cond[(v, frozenset())]
    return out


def rosenblatt_simulate(model: VineModel, stress: StressSpec | None = None, n: int | None = None,
                        seed=None) -> np.ndarray:
    """Simulate u-scores, optionally with one variable pinned at a quantile.

    In stressed mode the model is re-encoded with the conditioned variable
    in column 1 and that coordinate is held at ``stress.fixed_quantile``, so
    the other columns follow their joint conditional distribution.
    """
    if n is None:
        n = stress.n_sim if stress is not None else 1
    if n < 1:
        raise InputError("n must be positive")
    rng = np.random.default_rng(seed)
    m = model
    p = rng.random((n, model.d))
    if stress is not None:
        m = model.reroot(stress.conditioned_var)
        p[:, 0] = stress.fixed_quantile
    return rosenblatt_inverse(m, p)


# -- risk transfer -------------------------------------------------------------------

@dataclass(frozen=True)
class RiskTransferSummary:
    """Mean and standard error (over repetitions) of per-variable conditional medians."""

    conditioned_var: int
    mean: np.ndarray
    se: np.ndarray
    distance: dict
    groups: list

    def table(self) -> list:
        rows = []
        for v in range(1, len(self.mean) + 1):
            rows.append({"variable": v, "distance": self.distance.get(v),
                         "mean": float(self.mean[v - 1]), "se": float(self.se[v - 1])})
        return rows


def risk_transfer_summary(model: VineModel, stress: StressSpec, seed=None,
                          distance_array=None) -> RiskTransferSummary:
    """Repeat stressed simulation and summarise the per-variable medians.

    Each repetition simulates ``stress.n_sim`` vectors and records the median
    u-score of every variable; the report gives the mean and the standard
    deviation of these medians across ``stress.reps`` repetitions, along with
    group means by tree-1 distance from the conditioned variable.
    ``distance_array`` selects whose tree 1 defines the distances
    (default: the model's own).
    """
    m = model.reroot(stress.conditioned_var)
    rng = np.random.default_rng(seed)
    med = np.empty((stress.reps, model.d))
    for r in range(stress.reps):
        p = rng.random((stress.n_sim, model.d))
        p[:, 0] = stress.fixed_quantile
        med[r] = np.median(rosenblatt_inverse(m, p), axis=0)
    dist = tree1_distances(model.array if distance_array is None else distance_array, stress.conditioned_var)
    groups = []
    for g in sorted(set(dist.values()) - {0}):
        members = sorted(v for v, dv in dist.items() if dv == g)
        gm = med[:, [v - 1 for v in members]].mean(axis=1)
        groups.append({"distance": g, "variables": members,
                       "mean": float(gm.mean()), "se": float(gm.std(ddof=1)) if stress.reps > 1 else 0.0})
    se = med.std(axis=0, ddof=1) if stress.reps > 1 else np.zeros(model.d)
    return RiskTransferSummary(stress.conditioned_var, med.mean(axis=0), se, dist, groups)
