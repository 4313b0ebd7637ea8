"""Vine arrays, edge extraction and greedy maximum-spanning-tree structure learning.

Arrays use 1-based variable labels and are stored as ``(d, d)`` integer
matrices whose strictly lower triangle is zero.  Row ``l`` and column ``j``
(both 1-based) of the upper triangle stand for the edge
``[a_lj, a_jj | a_1j, ..., a_{l-1,j}]`` of tree ``l``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy import stats

from .exceptions import FitError, InputError, StructureError, VineArrayError

__all__ = [
    "VineArray",
    "Edge",
    "validate_array",
    "edges_of",
    "dvine_array",
    "array_from_edges",
    "learn_structure_mst",
    "LearnedStructure",
    "tree1_distances",
]


@dataclass(frozen=True)
class Edge:
    """One pair-copula slot of a vine.

    ``var_a`` is the row variable ``a_lj`` and ``var_b`` the diagonal
    variable ``a_jj``; the pair-copula takes ``(F(var_a | S), F(var_b | S))``.
    """

    var_a: int
    var_b: int
    cond_set: frozenset
    tree_level: int
    column: int = 0

    def __post_init__(self):
        if self.var_a == self.var_b:
            raise ValueError("edge variables must differ")
        if self.var_a in self.cond_set or self.var_b in self.cond_set:
            raise ValueError("conditioned variables may not be in the conditioning set")
        if len(self.cond_set) != self.tree_level - 1:
            raise ValueError("conditioning set size must equal tree level minus one")

    @property
    def conditioned(self) -> frozenset:
        return frozenset((self.var_a, self.var_b))

    @property
    def key(self) -> tuple:
        """Orientation-free identity of the edge."""
        return (self.conditioned, self.cond_set)

    def label(self) -> str:
        s = f"{self.var_a},{self.var_b}"
        if self.cond_set:
            s += ";" + ",".join(str(c) for c in sorted(self.cond_set))
        return s


@dataclass(frozen=True)
class VineArray:
    """A validated vine array.  Build with :func:`validate_array`."""

    matrix: np.ndarray = field(repr=False)

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    def entry(self, row: int, col: int) -> int:
        """``a_{row,col}`` with 1-based indices."""
        return int(self.matrix[row - 1, col - 1])

    @property
    def diagonal(self) -> tuple:
        return tuple(int(x) for x in np.diag(self.matrix))

    def cond_set(self, row: int, col: int) -> frozenset:
        return frozenset(int(x) for x in self.matrix[: row - 1, col - 1])

    def edge(self, row: int, col: int) -> Edge:
        return Edge(self.entry(row, col), self.entry(col, col), self.cond_set(row, col), row, col)

    def slots(self):
        """Yield ``(l, j)`` for every edge slot, level by level."""
        for level in range(1, self.d):
            for col in range(level + 1, self.d + 1):
                yield level, col

    def to_rows(self) -> list:
        """Upper-triangular rows, diagonal included."""
        return [[int(x) for x in self.matrix[i, i:]] for i in range(self.d)]

    @classmethod
    def from_rows(cls, rows) -> "VineArray":
        d = len(rows)
        m = np.zeros((d, d), dtype=int)
        for i, row in enumerate(rows):
            if len(row) != d - i:
                raise VineArrayError(f"row {i + 1} must have {d - i} entries", condition="shape")
            m[i, i:] = row
        return validate_array(m)

    def __eq__(self, other):
        return isinstance(other, VineArray) and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash(self.matrix.tobytes())


def validate_array(candidate) -> VineArray:
    """Check the vine-array conditions and return an immutable :class:`VineArray`.

    Raises
    ------
    VineArrayError
        With ``condition`` one of ``shape``, ``labels``, ``diagonal``,
        ``permutation`` or ``prefix`` and the offending 1-based ``column``.
    """
    if isinstance(candidate, VineArray):
        return candidate
    try:
        a = np.asarray(candidate)
        if a.dtype.kind == "f":
            if not np.all(a == np.round(a)):
                raise VineArrayError("entries must be integers", condition="labels")
        a = a.astype(int)
    except (TypeError, ValueError) as exc:
        raise VineArrayError(f"not an integer array: {exc}", condition="shape") from exc
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise VineArrayError("array must be square", condition="shape")
    d = a.shape[0]
    a = np.triu(a)
    upper = a[np.triu_indices(d)]
    if np.any(upper < 1) or np.any(upper > d):
        bad = np.argwhere((np.triu(np.ones_like(a)) > 0) & ((a < 1) | (a > d)))
        raise VineArrayError(f"labels must lie in 1..{d}", condition="labels", column=int(bad[0][1]) + 1)
    diag = np.diag(a)
    if sorted(diag.tolist()) != list(range(1, d + 1)):
        raise VineArrayError("diagonal is not a permutation of 1..d", condition="diagonal")
    for j in range(2, d + 1):
        col = a[: j - 1, j - 1]
        if sorted(col.tolist()) != sorted(diag[: j - 1].tolist()):
            raise VineArrayError(
                f"column {j} above the diagonal is not a permutation of the first {j - 1} diagonal entries",
                condition="permutation", column=j)
        for level in range(2, j):
            target = set(col[:level].tolist())
            ok = any(
                set(a[: level - 1, k - 1].tolist()) | {int(a[k - 1, k - 1])} == target
                for k in range(level, j)
            )
            if not ok:
                raise VineArrayError(
                    f"column {j}: the first {level} entries do not form an edge set of tree {level - 1}",
                    condition="prefix", column=j)
    a.setflags(write=False)
    return VineArray(a)


def edges_of(array) -> list:
    """Edges grouped by tree level: ``result[l - 1]`` holds the ``d - l`` edges of tree ``l``."""
    array = validate_array(array)
    return [[array.edge(level, col) for col in range(level + 1, array.d + 1)]
            for level in range(1, array.d)]


def dvine_array(order) -> VineArray:
    """Array of the D-vine whose first tree is the path through ``order``."""
    order = [int(x) for x in order]
    d = len(order)
    if sorted(order) != list(range(1, d + 1)):
        raise VineArrayError("order must be a permutation of 1..d", condition="diagonal")
    m = np.zeros((d, d), dtype=int)
    for j in range(d):
        m[j, j] = order[j]
        for level in range(j):
            m[level, j] = order[j - 1 - level]
    return validate_array(m)


def _find_edge(remaining, level, x):
    hits = [e for e in remaining[level] if x in e[0]]
    return hits


def array_from_edges(d: int, edges, avoid_last=None, force_last=None) -> VineArray:
    """Encode a vine given as edge sets into an array.

    Parameters
    ----------
    d : int
    edges : sequence of sequences
        ``edges[l - 1]`` lists the tree-``l`` edges as ``(conditioned, conditioning)``
        pairs of label collections.
    avoid_last : int, optional
        Keep this label out of every column but the first, so it ends up as
        ``a_11``.
    force_last : int, optional
        Put this label at ``a_dd``; it must be a conditioned variable of the
        top-tree edge.

    Raises
    ------
    StructureError
        The edges do not form a regular vine, or the requested placement is
        impossible.
    """
    remaining = {
        level: [(frozenset(c), frozenset(s)) for c, s in edges[level - 1]]
        for level in range(1, d)
    }
    for level in range(1, d):
        if len(remaining[level]) != d - level:
            raise StructureError(f"tree {level} needs {d - level} edges, got {len(remaining[level])}")
    m = np.zeros((d, d), dtype=int)
    alive = set(range(1, d + 1))
    for j in range(d, 1, -1):
        top = remaining[j - 1]
        if len(top) != 1:
            raise StructureError("edge sets do not nest into a vine")
        pair = sorted(top[0][0])
        if j == d and force_last is not None:
            if force_last not in pair:
                raise StructureError(f"variable {force_last} is not in the top tree")
            choices = [force_last]
        else:
            choices = sorted(pair, reverse=True)
            if avoid_last in choices:
                choices.remove(avoid_last)
        placed = False
        for x in choices:
            col, used, ok = [], [], True
            for level in range(1, j):
                hits = _find_edge(remaining, level, x)
                if len(hits) != 1 or hits[0][1] != frozenset(col):
                    ok = False
                    break
                (partner,) = hits[0][0] - {x}
                col.append(partner)
                used.append((level, hits[0]))
            if not ok:
                continue
            m[j - 1, j - 1] = x
            m[: j - 1, j - 1] = col
            for level, e in used:
                remaining[level].remove(e)
            alive.remove(x)
            placed = True
            break
        if not placed:
            raise StructureError(f"no variable of the top tree can be placed in column {j}")
    (last,) = alive
    m[0, 0] = last
    try:
        return validate_array(m)
    except VineArrayError as exc:
        raise StructureError(f"edge sets do not form a regular vine: {exc}") from exc


def tree1_distances(array, source: int) -> dict:
    """Graph distance in tree 1 from ``source`` to every label."""
    array = validate_array(array)
    adj = {v: set() for v in range(1, array.d + 1)}
    for e in edges_of(array)[0] if array.d > 1 else []:
        adj[e.var_a].add(e.var_b)
        adj[e.var_b].add(e.var_a)
    dist = {source: 0}
    frontier = [source]
    while frontier:
        nxt = []
        for v in frontier:
            for w in sorted(adj[v]):
                if w not in dist:
                    dist[w] = dist[v] + 1
                    nxt.append(w)
        frontier = nxt
    return dist


# -- structure learning -------------------------------------------------------

class LearnedStructure(NamedTuple):
    """Output of :func:`learn_structure_mst`.

    ``pseudo_obs`` maps ``(label, frozenset(conditioning))`` to the conditional
    u-scores ``F(label | conditioning)``; ``edge_fits`` maps an edge key
    ``(frozenset(conditioned), frozenset(conditioning))`` to
    ``((x, y), fit)`` where the fit's copula takes ``(F(x|S), F(y|S))``.
    """

    array: VineArray
    pseudo_obs: dict
    edge_fits: dict


def _abs_tau(x, y) -> float:
    tau = stats.kendalltau(x, y).statistic
    return 0.0 if not np.isfinite(tau) else abs(float(tau))


def _prim(n_nodes: int, cand: dict) -> list:
    """Maximum spanning tree over ``cand = {(i, j): (weight, key)}`` with ``i < j``.

    Ties in weight go to the lexicographically smallest key.
    """
    adj = {i: [] for i in range(n_nodes)}
    for (i, j), (w, key) in cand.items():
        adj[i].append((j, w, key))
        adj[j].append((i, w, key))
    in_tree = {0}
    chosen = []
    while len(in_tree) < n_nodes:
        best = None
        for i in in_tree:
            for j, w, key in adj[i]:
                if j in in_tree:
                    continue
                rank = (-w, key)
                if best is None or rank < best[0]:
                    best = (rank, i, j)
        if best is None:
            raise StructureError("candidate graph is disconnected")
        _, i, j = best
        in_tree.add(j)
        chosen.append((min(i, j), max(i, j)))
    return chosen


def _default_fit_edge(pairs):
    from .fit import DEFAULT_CANDIDATES, select_edge_family

    return select_edge_family(pairs, DEFAULT_CANDIDATES, "aic")


def learn_structure_mst(uscores, weight: str = "abs_kendall_tau",
                        fit_edge: Callable | None = None) -> LearnedStructure:
    """Learn a vine tree by tree with maximum spanning trees on ``|tau|``.

    Tree 1 is a maximum spanning tree of the complete graph on the
    variables.  Each later tree is a maximum spanning tree among edges joining
    nodes (edges of the previous tree) that share an endpoint, weighted by
    ``|tau|`` of the pseudo-observations produced by the fitted copulas of the
    previous tree.

    Parameters
    ----------
    uscores : ndarray, shape (n, d)
    weight : {"abs_kendall_tau"}
    fit_edge : callable, optional
        ``fit_edge(pairs) -> EdgeFit``; defaults to AIC selection over the
        default candidate set.
    """
    if weight != "abs_kendall_tau":
        raise ValueError(f"unsupported weight {weight!r}")
    u = np.asarray(uscores, dtype=float)
    if u.ndim != 2:
        raise InputError("u-scores must be a 2-d matrix")
    n, d = u.shape
    if d < 2:
        raise InputError("need at least two variables")
    if n < 50:
        raise InputError(f"need at least 50 rows, got {n}")
    for c in range(d):
        if np.ptp(u[:, c]) == 0.0:
            raise InputError(f"column {c + 1} is constant; Kendall's tau is undefined")
    if fit_edge is None:
        fit_edge = _default_fit_edge

    from .copula.bivariate import clamp

    pseudo = {(v, frozenset()): u[:, v - 1] for v in range(1, d + 1)}
    fits = {}
    levels = []
    # Nodes of the current tree: (all-variable set, endpoint node ids in previous tree)
    nodes = [(frozenset({v}), None) for v in range(1, d + 1)]
    for level in range(1, d):
        cand = {}
        for i, k in itertools.combinations(range(len(nodes)), 2):
            ui, uk = nodes[i][0], nodes[k][0]
            if level > 1 and not set(nodes[i][1]) & set(nodes[k][1]):
                continue
            conditioned = ui ^ uk
            conditioning = ui & uk
            if len(conditioned) != 2:
                continue
            x, y = sorted(conditioned)
            w = _abs_tau(pseudo[(x, conditioning)], pseudo[(y, conditioning)])
            key = ((x, y), tuple(sorted(conditioning)))
            cand[(i, k)] = (w, key)
        chosen = _prim(len(nodes), cand)
        level_edges, new_nodes = [], []
        for i, k in sorted(chosen, key=lambda ik: cand[ik][1]):
            (x, y), cond = cand[(i, k)][1]
            s = frozenset(cond)
            ux, uy = pseudo[(x, s)], pseudo[(y, s)]
            try:
                fit = fit_edge(np.column_stack([ux, uy]))
            except FitError as exc:
                # array columns are not known until all trees are chosen
                exc.where = (level, None)
                exc.edge = ((x, y), tuple(sorted(s)))
                raise
            fits[(frozenset((x, y)), s)] = ((x, y), fit)
            if level < d - 1:
                cop = fit.copula
                pseudo[(x, s | {y})] = clamp(cop.h1(ux, uy))
                pseudo[(y, s | {x})] = clamp(cop.h2(ux, uy))
            level_edges.append(((x, y), s))
            new_nodes.append((nodes[i][0] | nodes[k][0], (i, k)))
        levels.append(level_edges)
        nodes = new_nodes
    array = array_from_edges(d, levels)
    return LearnedStructure(array, pseudo, fits)
