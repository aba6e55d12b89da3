"""Exact planarity testing with the left-right (LR) criterion.

The test runs in linear time: a DFS orientation pass computes lowpoints and
nesting depths, then a second DFS maintains a stack of conflict pairs of
back-edge intervals.  The graph is planar iff no conflict pair ever needs
both of its intervals on the same side.

Only a yes/no answer is produced; no embedding is built.
"""

from __future__ import annotations

import sys
from collections.abc import Iterable, Sequence

_NONE = -1


def is_planar_edges(n_vertices: int, edges: Iterable[tuple[int, int]]) -> bool:
    """Return True iff the simple undirected graph on ``range(n_vertices)`` is planar.

    ``edges`` must not contain self-loops or duplicate pairs.
    """
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n_vertices)]
    m = 0
    for u, v in edges:
        adj[u].append((v, m))
        adj[v].append((u, m))
        m += 1
    # every non-planar graph contains a subdivision of K5 (10 edges) or K3,3 (9 edges)
    if n_vertices < 5 or m < 9:
        return True
    if m > 3 * n_vertices - 6:
        return False
    return _LRTest(n_vertices, m, adj).run()


class _LRTest:
    """One-shot LR planarity tester over integer vertices.

    Conflict pairs are 4-slot lists ``[L.low, L.high, R.low, R.high]`` holding
    oriented edge ids, with ``-1`` marking an absent edge.
    """

    def __init__(self, n: int, m: int, adj: Sequence[list[tuple[int, int]]]):
        self.n = n
        self.m = m
        self.adj = adj
        self.height = [_NONE] * n
        self.parent_edge = [_NONE] * n
        # oriented edge ids are assigned in DFS order, one per undirected edge
        self.src = [0] * m
        self.dst = [0] * m
        self.lowpt = [0] * m
        self.lowpt2 = [0] * m
        self.nesting = [0] * m
        self.out: list[list[int]] = [[] for _ in range(n)]

    def run(self) -> bool:
        limit = sys.getrecursionlimit()
        if limit < 4 * self.n + 100:
            sys.setrecursionlimit(4 * self.n + 100)
        try:
            roots = []
            for v in range(self.n):
                if self.height[v] == _NONE:
                    self.height[v] = 0
                    roots.append(v)
                    self._orient(v)
            m = self.m
            nesting = self.nesting
            self.ordered = [sorted(out, key=nesting.__getitem__) for out in self.out]
            self.ref = [_NONE] * m
            self.lowpt_edge = [_NONE] * m
            self.stack_bottom: list[list[int] | None] = [None] * m
            self.S: list[list[int]] = []
            for root in roots:
                if not self._test(root):
                    return False
            return True
        finally:
            sys.setrecursionlimit(limit)

    def _orient(self, root: int) -> None:
        adj = self.adj
        height = self.height
        parent_edge = self.parent_edge
        src, dst, out = self.src, self.dst, self.out
        lowpt, lowpt2 = self.lowpt, self.lowpt2
        oriented = [False] * self.m
        next_id = self._next_id if hasattr(self, "_next_id") else 0
        # explicit stack of (vertex, position in its adjacency list)
        stack = [[root, 0]]
        while stack:
            frame = stack[-1]
            v, pos = frame
            nbrs = adj[v]
            hv = height[v]
            descended = False
            while pos < len(nbrs):
                w, uid = nbrs[pos]
                pos += 1
                if oriented[uid]:
                    continue
                oriented[uid] = True
                ei = next_id
                next_id += 1
                src[ei] = v
                dst[ei] = w
                out[v].append(ei)
                lowpt[ei] = hv
                lowpt2[ei] = hv
                if height[w] == _NONE:
                    parent_edge[w] = ei
                    height[w] = hv + 1
                    frame[1] = pos
                    stack.append([w, 0])
                    descended = True
                    break
                lowpt[ei] = height[w]
                self._finish_edge(ei, v, hv)
            if descended:
                continue
            stack.pop()
            e = parent_edge[v]
            if e != _NONE and stack:
                self._finish_edge(e, src[e], height[src[e]])
        self._next_id = next_id

    def _finish_edge(self, ei: int, v: int, hv: int) -> None:
        """Set the nesting depth of ``ei`` and fold its lowpoints into v's parent edge."""
        lowpt, lowpt2 = self.lowpt, self.lowpt2
        low = lowpt[ei]
        self.nesting[ei] = 2 * low + (1 if lowpt2[ei] < hv else 0)
        e = self.parent_edge[v]
        if e != _NONE:
            le = lowpt[e]
            if low < le:
                lowpt2[e] = le if le < lowpt2[ei] else lowpt2[ei]
                lowpt[e] = low
            elif low > le:
                if low < lowpt2[e]:
                    lowpt2[e] = low
            elif lowpt2[ei] < lowpt2[e]:
                lowpt2[e] = lowpt2[ei]

    def _test(self, v: int) -> bool:
        S = self.S
        lowpt = self.lowpt
        parent_edge = self.parent_edge
        e = parent_edge[v]
        ordered = self.ordered[v]
        hv = self.height[v]
        for ei in ordered:
            self.stack_bottom[ei] = S[-1] if S else None
            w = self.dst[ei]
            if ei == parent_edge[w]:
                if not self._test(w):
                    return False
            else:
                self.lowpt_edge[ei] = ei
                S.append([_NONE, _NONE, ei, ei])
            if lowpt[ei] < hv:
                if ei == ordered[0]:
                    self.lowpt_edge[e] = self.lowpt_edge[ei]
                elif not self._add_constraints(ei, e):
                    return False
        if e != _NONE:
            u = self.src[e]
            self._remove_back_edges(u)
            if lowpt[e] < self.height[u]:
                top = S[-1]
                h_left, h_right = top[1], top[3]
                if h_left != _NONE and (h_right == _NONE or lowpt[h_left] > lowpt[h_right]):
                    self.ref[e] = h_left
                else:
                    self.ref[e] = h_right
        return True

    def _add_constraints(self, ei: int, e: int) -> bool:
        S = self.S
        lowpt = self.lowpt
        ref = self.ref
        P = [_NONE, _NONE, _NONE, _NONE]
        bottom = self.stack_bottom[ei]
        # merge return edges of ei into P.R
        while True:
            Q = S.pop()
            if Q[0] != _NONE or Q[1] != _NONE:
                Q = [Q[2], Q[3], Q[0], Q[1]]
            if Q[0] != _NONE or Q[1] != _NONE:
                return False
            if lowpt[Q[2]] > lowpt[e]:
                if P[2] == _NONE and P[3] == _NONE:
                    P[3] = Q[3]
                else:
                    ref[P[2]] = Q[3]
                P[2] = Q[2]
            else:
                ref[Q[2]] = self.lowpt_edge[e]
            if (S[-1] if S else None) is bottom:
                break
        # merge conflicting return edges of earlier siblings into P.L
        low_ei = lowpt[ei]
        while S:
            Q = S[-1]
            left_conflict = Q[1] != _NONE and lowpt[Q[1]] > low_ei
            right_conflict = Q[3] != _NONE and lowpt[Q[3]] > low_ei
            if not (left_conflict or right_conflict):
                break
            S.pop()
            if right_conflict:
                Q = [Q[2], Q[3], Q[0], Q[1]]
                if Q[3] != _NONE and lowpt[Q[3]] > low_ei:
                    return False
            if P[2] != _NONE:
                ref[P[2]] = Q[3]
            if Q[2] != _NONE:
                P[2] = Q[2]
            if P[0] == _NONE and P[1] == _NONE:
                P[1] = Q[1]
            else:
                ref[P[0]] = Q[1]
            P[0] = Q[0]
        if P[0] != _NONE or P[1] != _NONE or P[2] != _NONE or P[3] != _NONE:
            S.append(P)
        return True

    def _lowest(self, P: list[int]) -> int:
        lowpt = self.lowpt
        if P[0] == _NONE and P[1] == _NONE:
            return lowpt[P[2]]
        if P[2] == _NONE and P[3] == _NONE:
            return lowpt[P[0]]
        return min(lowpt[P[0]], lowpt[P[2]])

    def _remove_back_edges(self, u: int) -> None:
        S = self.S
        dst = self.dst
        ref = self.ref
        hu = self.height[u]
        while S and self._lowest(S[-1]) == hu:
            S.pop()
        if S:
            P = S.pop()
            while P[1] != _NONE and dst[P[1]] == u:
                P[1] = ref[P[1]]
            if P[1] == _NONE and P[0] != _NONE:
                ref[P[0]] = P[2]
                P[0] = _NONE
            while P[3] != _NONE and dst[P[3]] == u:
                P[3] = ref[P[3]]
            if P[3] == _NONE and P[2] != _NONE:
                ref[P[2]] = P[0]
                P[2] = _NONE
            S.append(P)
