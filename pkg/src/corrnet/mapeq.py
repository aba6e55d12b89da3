"""Two-level map equation and a seeded multi-run optimizer for it.

For an undirected graph a random walker visits vertex ``a`` at rate
``p_a = s_a / 2W`` (``s_a`` its strength, ``W`` the total edge weight) and
leaves module ``m`` at rate ``q_m = cut_m / 2W``.  The codelength of a
partition, in bits, is

    L = plogp(sum q_m) - 2 sum plogp(q_m) - sum plogp(p_a) + sum plogp(q_m + p_m)

with ``plogp(x) = x log2 x`` and ``p_m`` the total visit rate of module ``m``.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DataError
from .filtgraph import FilteredGraph

WEIGHT_FLOOR = 1e-6
# moves must improve the codelength by more than this to count
_MIN_GAIN = 1e-10


class Weighting(str, Enum):
    CORRELATION = "correlation"
    UNWEIGHTED = "unweighted"


def _plogp(x: float) -> float:
    return x * math.log2(x) if x > 0 else 0.0


@dataclass(frozen=True)
class Partition:
    """Vertex-to-module assignment with codelength (bits) and within-module flow ranks.

    Module ids run from 0 in order of decreasing total module flow.  ``flow_rank``
    is 1 for the most visited vertex of its module.
    """

    labels: tuple[str, ...]
    assignment: tuple[int, ...]
    codelength: float
    flow: tuple[float, ...]
    flow_rank: tuple[int, ...]

    @property
    def n_modules(self) -> int:
        return max(self.assignment) + 1 if self.assignment else 0

    def modules(self) -> list[list[int]]:
        """Member vertex indices of each module, ordered by flow rank."""
        out: list[list[int]] = [[] for _ in range(self.n_modules)]
        for v in sorted(range(len(self.assignment)), key=lambda v: self.flow_rank[v]):
            out[self.assignment[v]].append(v)
        return out

    def ordering(self) -> list[str]:
        """Labels grouped by module, then by flow rank within each module."""
        return [self.labels[v] for members in self.modules() for v in members]


class _FlowGraph:
    def __init__(self, graph: FilteredGraph, weighting: Weighting | str = Weighting.CORRELATION):
        weighting = Weighting(weighting)
        n = graph.n
        if not graph.edges:
            raise DataError("map equation needs at least one edge")
        nbrs: list[dict[int, float]] = [{} for _ in range(n)]
        for i, j, w in graph.edges:
            w = max(w, WEIGHT_FLOOR) if weighting is Weighting.CORRELATION else 1.0
            nbrs[i][j] = w
            nbrs[j][i] = w
        total = sum(sum(d.values()) for d in nbrs)  # 2W: each edge counted from both ends
        if not total > 0:
            raise DataError("total edge weight must be positive")
        _check_connected(nbrs, graph.labels)
        self.n = n
        self.labels = graph.labels
        # all rates in units of visits per step
        self.links = [[(j, w / total) for j, w in d.items()] for d in nbrs]
        self.flow = [sum(w for _, w in row) for row in self.links]
        self.node_entropy_term = sum(_plogp(p) for p in self.flow)


def _check_connected(nbrs: Sequence[dict[int, float]], labels: Sequence[str]) -> None:
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in nbrs[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != len(nbrs):
        missing = next(labels[v] for v in range(len(nbrs)) if v not in seen)
        raise DataError(f"graph is disconnected ({missing} unreachable)")


def _codelength(fg: _FlowGraph, assignment: Sequence[int]) -> float:
    exit_: dict[int, float] = {}
    flow: dict[int, float] = {}
    for v in range(fg.n):
        m = assignment[v]
        flow[m] = flow.get(m, 0.0) + fg.flow[v]
        exit_.setdefault(m, 0.0)
        for u, f in fg.links[v]:
            if assignment[u] != m:
                exit_[m] += f
    total_exit = sum(exit_.values())
    return (_plogp(total_exit) - 2.0 * sum(_plogp(q) for q in exit_.values())
            - fg.node_entropy_term + sum(_plogp(exit_[m] + flow[m]) for m in flow))


def map_equation(graph: FilteredGraph, partition: Partition | Sequence[int],
                 weighting: Weighting | str = Weighting.CORRELATION) -> float:
    """Two-level map equation codelength, in bits, of a vertex partition."""
    assignment = partition.assignment if isinstance(partition, Partition) else tuple(partition)
    if len(assignment) != graph.n:
        raise DataError("partition size does not match graph")
    return _codelength(_FlowGraph(graph, weighting), assignment)


class _Level:
    """Nodes (vertices or merged supernodes) with module bookkeeping for fast move deltas."""

    def __init__(self, flow: list[float], out: list[float], links: list[list[tuple[int, float]]],
                 module_of: list[int], node_entropy_term: float):
        self.n = len(flow)
        self.node_flow = flow
        self.node_out = out
        self.links = links
        self.module_of = module_of
        self.node_entropy_term = node_entropy_term
        k = self.n
        self.mod_flow = [0.0] * k
        self.mod_exit = [0.0] * k
        self.mod_size = [0] * k
        for x in range(k):
            m = module_of[x]
            self.mod_flow[m] += flow[x]
            self.mod_size[m] += 1
            for y, f in links[x]:
                if module_of[y] != m:
                    self.mod_exit[m] += f
        self.sum_exit = sum(self.mod_exit)
        self.sum_plogp_exit = sum(_plogp(q) for q in self.mod_exit)
        self.sum_plogp_exit_flow = sum(_plogp(q + p) for q, p in zip(self.mod_exit, self.mod_flow))

    def codelength(self) -> float:
        return (_plogp(self.sum_exit) - 2.0 * self.sum_plogp_exit - self.node_entropy_term
                + self.sum_plogp_exit_flow)

    def _delta(self, x: int, a: int, b: int, f_xa: float, f_xb: float) -> tuple[float, float, float]:
        """Codelength change for moving node x from module a to module b, plus the new exits."""
        mod_exit, mod_flow = self.mod_exit, self.mod_flow
        out, p = self.node_out[x], self.node_flow[x]
        ea, eb = mod_exit[a], mod_exit[b]
        fa, fb = mod_flow[a], mod_flow[b]
        new_ea = ea - out + 2.0 * f_xa
        new_eb = eb + out - 2.0 * f_xb
        new_sum = self.sum_exit + (new_ea - ea) + (new_eb - eb)
        delta = (_plogp(new_sum) - _plogp(self.sum_exit)
                 - 2.0 * (_plogp(new_ea) + _plogp(new_eb) - _plogp(ea) - _plogp(eb))
                 + _plogp(new_ea + fa - p) + _plogp(new_eb + fb + p)
                 - _plogp(ea + fa) - _plogp(eb + fb))
        return delta, new_ea, new_eb

    def _apply(self, x: int, a: int, b: int, new_ea: float, new_eb: float) -> None:
        mod_exit, mod_flow = self.mod_exit, self.mod_flow
        p = self.node_flow[x]
        self.sum_plogp_exit += _plogp(new_ea) + _plogp(new_eb) - _plogp(mod_exit[a]) - _plogp(mod_exit[b])
        self.sum_plogp_exit_flow += (_plogp(new_ea + mod_flow[a] - p) + _plogp(new_eb + mod_flow[b] + p)
                                     - _plogp(mod_exit[a] + mod_flow[a]) - _plogp(mod_exit[b] + mod_flow[b]))
        self.sum_exit += (new_ea - mod_exit[a]) + (new_eb - mod_exit[b])
        mod_exit[a], mod_exit[b] = new_ea, new_eb
        mod_flow[a] -= p
        mod_flow[b] += p
        self.mod_size[a] -= 1
        self.mod_size[b] += 1
        self.module_of[x] = b

    def move_nodes(self, rng: np.random.Generator, exhaustive: bool) -> int:
        """Sweep nodes in random order, moving each to its best module, until stable.

        Without ``exhaustive`` only modules of neighbouring nodes are candidates
        (pure merging).  With it, every nonempty module and a fresh empty module
        are tried, so on return no single move lowers the codelength.
        """
        module_of = self.module_of
        total_moves = 0
        while True:
            moves = 0
            for x in rng.permutation(self.n).tolist():
                a = module_of[x]
                to_module: dict[int, float] = {}
                for y, f in self.links[x]:
                    m = module_of[y]
                    to_module[m] = to_module.get(m, 0.0) + f
                f_xa = to_module.pop(a, 0.0)
                if exhaustive:
                    for m in range(self.n):
                        if self.mod_size[m] and m != a and m not in to_module:
                            to_module[m] = 0.0
                    if self.mod_size[a] > 1:
                        empty = self.mod_size.index(0)
                        to_module.setdefault(empty, 0.0)
                best, best_delta, best_exits = a, -_MIN_GAIN, None
                for b, f_xb in to_module.items():
                    delta, new_ea, new_eb = self._delta(x, a, b, f_xa, f_xb)
                    if delta < best_delta:
                        best, best_delta, best_exits = b, delta, (new_ea, new_eb)
                if best != a:
                    self._apply(x, a, best, *best_exits)
                    moves += 1
            total_moves += moves
            if moves == 0:
                return total_moves


def _aggregate(fg: _FlowGraph, assignment: list[int]) -> tuple[_Level, list[int]]:
    """Collapse modules of ``assignment`` into supernodes, each in its own module."""
    ids = {m: k for k, m in enumerate(dict.fromkeys(assignment))}
    k = len(ids)
    flow = [0.0] * k
    out = [0.0] * k
    between: list[dict[int, float]] = [{} for _ in range(k)]
    for v in range(fg.n):
        a = ids[assignment[v]]
        flow[a] += fg.flow[v]
        for u, f in fg.links[v]:
            b = ids[assignment[u]]
            if a != b:
                out[a] += f
                between[a][b] = between[a].get(b, 0.0) + f
    links = [list(d.items()) for d in between]
    level = _Level(flow, out, links, list(range(k)), fg.node_entropy_term)
    return level, [ids[m] for m in assignment]


def _merge(fg: _FlowGraph, assignment: list[int], rng: np.random.Generator) -> list[int]:
    """Multilevel agglomeration: merge (super)nodes greedily, collapse, repeat."""
    while True:
        level, node_of_vertex = _aggregate(fg, assignment)
        if level.n == 1 or level.move_nodes(rng, exhaustive=False) == 0:
            return assignment
        assignment = [level.module_of[node_of_vertex[v]] for v in range(fg.n)]


def _single_run(fg: _FlowGraph, rng: np.random.Generator) -> list[int]:
    vertex_level_out = fg.flow  # each vertex's exit equals its visit rate at vertex level
    assignment = _merge(fg, list(range(fg.n)), rng)
    best = math.inf
    while True:
        ids = {m: k for k, m in enumerate(dict.fromkeys(assignment))}
        level = _Level(fg.flow, list(vertex_level_out), fg.links, [ids[m] for m in assignment],
                       fg.node_entropy_term)
        level.move_nodes(rng, exhaustive=True)
        assignment = list(level.module_of)
        merged = _merge(fg, assignment, rng)
        if merged == assignment:
            return assignment
        length = _codelength(fg, merged)
        if not length < best - _MIN_GAIN:
            return assignment
        best = length
        assignment = merged


def _finalize(fg: _FlowGraph, assignment: Sequence[int]) -> Partition:
    totals: dict[int, float] = {}
    first: dict[int, int] = {}
    for v, m in enumerate(assignment):
        totals[m] = totals.get(m, 0.0) + fg.flow[v]
        first.setdefault(m, v)
    order = sorted(totals, key=lambda m: (-totals[m], first[m]))
    relabel = {m: k for k, m in enumerate(order)}
    new = tuple(relabel[m] for m in assignment)
    rank = [0] * fg.n
    for m in range(len(order)):
        members = sorted((v for v in range(fg.n) if new[v] == m), key=lambda v: (-fg.flow[v], v))
        for r, v in enumerate(members, start=1):
            rank[v] = r
    return Partition(fg.labels, new, _codelength(fg, new), tuple(fg.flow), tuple(rank))


def detect_communities(graph: FilteredGraph, n_runs: int = 100, seed: int = 0,
                       weighting: Weighting | str = Weighting.CORRELATION) -> Partition:
    """Minimum-codelength partition over ``n_runs`` independently seeded optimizations.

    Each run merges greedily (multilevel, random node order) and then refines
    with single-vertex moves until none lowers the codelength.  Run ``r`` draws
    from a generator seeded with ``(seed, r)``, so the result does not depend on
    how runs are scheduled.  Correlation weights below 1e-6 are floored at 1e-6.
    """
    if n_runs < 1:
        raise DataError("n_runs must be at least 1")
    fg = _FlowGraph(graph, weighting)
    best_assignment = None
    best_length = math.inf
    for run in range(n_runs):
        rng = np.random.default_rng([seed, run])
        assignment = _single_run(fg, rng)
        length = _codelength(fg, assignment)
        if length < best_length - _MIN_GAIN:
            best_assignment, best_length = assignment, length
    return _finalize(fg, best_assignment)


def one_module_codelength(graph: FilteredGraph, weighting: Weighting | str = Weighting.CORRELATION) -> float:
    """Codelength of the trivial partition: the entropy of the visit rates."""
    return map_equation(graph, [0] * graph.n, weighting)
