"""Mutual information of link co-occurrence between graphs on a shared vertex set.

Every unordered vertex pair is treated as one observation of two binary
variables: linked in the first graph, linked in the second.  Probabilities are
the link counts divided by the N(N-1)/2 pairs; logs are natural, so the raw
mutual information and entropies are in nats.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

from .errors import DataError, DegenerateEntropyError
from .filtgraph import FilteredGraph


@dataclass(frozen=True)
class LinkMIResult:
    n_vertices: int
    n1: int
    n2: int
    n12: int
    p11: float
    p10: float
    p01: float
    p00: float
    mutual_information: float
    entropy1: float
    entropy2: float
    normalized: float | None  # None when an entropy is zero

    @property
    def degenerate(self) -> bool:
        return self.normalized is None

    @property
    def joint(self) -> tuple[float, float, float, float]:
        return self.p11, self.p10, self.p01, self.p00


def _xlogy_ratio(p: float, q: float) -> float:
    return p * math.log(p / q) if p > 0 else 0.0


def _entropy(p1: float) -> float:
    return -sum(p * math.log(p) for p in (p1, 1.0 - p1) if p > 0)


def link_mi_from_counts(n_vertices: int, n1: int, n2: int, n12: int) -> LinkMIResult:
    """Closed-form link mutual information from the three link counts."""
    pairs = n_vertices * (n_vertices - 1) / 2
    if n_vertices < 2:
        raise DataError("need at least 2 vertices")
    if not (0 <= n12 <= min(n1, n2) and n1 + n2 - n12 <= pairs):
        raise DataError(f"inconsistent link counts n1={n1} n2={n2} n12={n12} for N={n_vertices}")
    scale = 2.0 / (n_vertices * n_vertices - n_vertices)
    p1 = n1 * scale
    p2 = n2 * scale
    p11 = n12 * scale
    p10 = (n1 - n12) * scale
    p01 = (n2 - n12) * scale
    p00 = 1.0 - (n1 + n2 - n12) * scale
    mi = (_xlogy_ratio(p11, p1 * p2) + _xlogy_ratio(p10, p1 * (1 - p2))
          + _xlogy_ratio(p01, (1 - p1) * p2) + _xlogy_ratio(p00, (1 - p1) * (1 - p2)))
    # rounding can leave a tiny negative value for independent pairs
    mi = max(mi, 0.0)
    h1 = _entropy(p1)
    h2 = _entropy(p2)
    normalized = mi / math.sqrt(h1 * h2) if h1 > 0 and h2 > 0 else None
    return LinkMIResult(n_vertices, n1, n2, n12, p11, p10, p01, p00, mi, h1, h2, normalized)


def link_mutual_information(g1: FilteredGraph, g2: FilteredGraph, strict: bool = True) -> LinkMIResult:
    """Mutual information of link co-occurrence and its entropy-normalized value.

    With ``strict`` (the default) a graph with zero link entropy (empty or
    complete) raises DegenerateEntropyError carrying the raw result; otherwise
    the result is returned with ``normalized = None``.
    """
    if set(g1.labels) != set(g2.labels):
        raise DataError("label sets differ between graphs")
    s1 = g1.label_pairs()
    s2 = g2.label_pairs()
    result = link_mi_from_counts(g1.n, len(s1), len(s2), len(s1 & s2))
    if strict and result.degenerate:
        which = "first" if result.entropy1 == 0 else "second"
        raise DegenerateEntropyError(f"zero entropy in {which} graph", result)
    return result


def rolling_mi(graphs: Sequence[FilteredGraph], strict: bool = True) -> list[LinkMIResult]:
    """Link mutual information between each graph and its successor."""
    if len(graphs) < 2:
        raise DataError("rolling mutual information needs at least 2 graphs")
    return [link_mutual_information(a, b, strict=strict) for a, b in zip(graphs, graphs[1:])]
