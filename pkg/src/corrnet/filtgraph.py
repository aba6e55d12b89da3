"""Correlation-filtered graphs: minimum spanning tree and planar maximally filtered graph."""

from __future__ import annotations

import csv
import xml.etree.ElementTree as ET
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import IO

import numpy as np

from .corr import CorrelationMatrix
from .errors import DataError
from .planarity import is_planar_edges


class GraphKind(str, Enum):
    MST = "MST"
    PMFG = "PMFG"
    OTHER = "OTHER"


@dataclass(frozen=True)
class FilteredGraph:
    """Undirected weighted graph on a fixed, ordered vertex set.

    ``edges`` holds ``(i, j, weight)`` triples with ``i < j`` (vertex indices into
    ``labels``), sorted by ``(i, j)``.
    """

    labels: tuple[str, ...]
    edges: tuple[tuple[int, int, float], ...]
    kind: GraphKind = GraphKind.OTHER

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        n = len(self.labels)
        clean = []
        for i, j, w in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise DataError(f"self-loop on {self.labels[i]}")
            if i > j:
                i, j = j, i
            if not 0 <= i < j < n:
                raise DataError(f"edge ({i}, {j}) outside vertex range 0..{n - 1}")
            clean.append((i, j, float(w)))
        clean.sort()
        for a, b in zip(clean, clean[1:]):
            if a[:2] == b[:2]:
                raise DataError(f"duplicate edge {self.labels[a[0]]}-{self.labels[a[1]]}")
        object.__setattr__(self, "edges", tuple(clean))
        object.__setattr__(self, "kind", GraphKind(self.kind))

    @property
    def n(self) -> int:
        return len(self.labels)

    def pairs(self) -> set[tuple[int, int]]:
        return {(i, j) for i, j, _ in self.edges}

    def label_pairs(self) -> set[frozenset[str]]:
        return {frozenset((self.labels[i], self.labels[j])) for i, j, _ in self.edges}

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for i, j, _ in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def weights(self) -> np.ndarray:
        return np.array([w for _, _, w in self.edges])


def ranked_pairs(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vertex pairs ``i < j`` sorted by decreasing correlation, ties by ``(i, j)``."""
    n = values.shape[0]
    iu, ju = np.triu_indices(n, 1)
    order = np.lexsort((ju, iu, -values[iu, ju]))
    return iu[order], ju[order]


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


def _values(matrix: CorrelationMatrix | np.ndarray) -> tuple[tuple[str, ...], np.ndarray]:
    if isinstance(matrix, CorrelationMatrix):
        return matrix.labels, matrix.values
    values = np.asarray(matrix, dtype=float)
    return tuple(str(k) for k in range(values.shape[0])), values


def mst(matrix: CorrelationMatrix | np.ndarray) -> FilteredGraph:
    """Maximum-correlation spanning tree by Kruskal's scan over ranked pairs."""
    labels, c = _values(matrix)
    n = len(labels)
    if n < 2:
        raise DataError("MST needs at least 2 vertices")
    uf = _UnionFind(n)
    edges = []
    for i, j in zip(*ranked_pairs(c)):
        i, j = int(i), int(j)
        if uf.union(i, j):
            edges.append((i, j, c[i, j]))
            if len(edges) == n - 1:
                break
    return FilteredGraph(labels, tuple(edges), GraphKind.MST)


def pmfg(matrix: CorrelationMatrix | np.ndarray) -> FilteredGraph:
    """Planar maximally filtered graph.

    Pairs are scanned by decreasing correlation and each edge is kept iff the
    graph stays planar, stopping once 3(N-2) edges are present.
    """
    labels, c = _values(matrix)
    n = len(labels)
    if n < 3:
        raise DataError("PMFG needs at least 3 vertices")
    target = 3 * (n - 2)
    uf = _UnionFind(n)
    kept: list[tuple[int, int]] = []
    for i, j in zip(*ranked_pairs(c)):
        i, j = int(i), int(j)
        kept.append((i, j))
        # joining two components can never break planarity
        if not uf.union(i, j) and not is_planar_edges(n, kept):
            kept.pop()
        if len(kept) == target:
            break
    return FilteredGraph(labels, tuple((i, j, c[i, j]) for i, j in kept), GraphKind.PMFG)


def is_planar(graph: FilteredGraph) -> bool:
    """Exact planarity test (left-right criterion)."""
    return is_planar_edges(graph.n, [(i, j) for i, j, _ in graph.edges])


def degree_profile(graphs: Sequence[FilteredGraph], ordering: Sequence[str]) -> np.ndarray:
    """Vertex degrees, one row per graph, columns in ``ordering``."""
    if not graphs:
        return np.zeros((0, len(ordering)), dtype=int)
    labels = graphs[0].labels
    if sorted(ordering) != sorted(labels) or len(set(ordering)) != len(ordering):
        raise DataError("ordering is not a permutation of the graph labels")
    index = {label: k for k, label in enumerate(labels)}
    cols = [index[label] for label in ordering]
    rows = []
    for g in graphs:
        if g.labels != labels:
            raise DataError("label mismatch between graphs in degree profile")
        rows.append(g.degrees()[cols])
    return np.array(rows, dtype=int)


def write_edgelist(graph: FilteredGraph, out: IO[str]) -> None:
    writer = csv.writer(out, lineterminator="\n")
    for i, j, w in graph.edges:
        writer.writerow([graph.labels[i], graph.labels[j], repr(w)])


def read_edgelist(source: str | Path | IO[str], labels: Sequence[str] | None = None,
                  kind: GraphKind | str = GraphKind.OTHER) -> FilteredGraph:
    """Read ``labelA,labelB,weight`` lines.

    Without ``labels`` the vertex order is the order of first appearance.
    """
    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            return read_edgelist(fh, labels, kind)
    raw = []
    for lineno, row in enumerate(csv.reader(source), start=1):
        if not row or not any(f.strip() for f in row):
            continue
        if len(row) != 3:
            raise DataError(f"edge list line {lineno}: expected 3 fields")
        try:
            raw.append((row[0].strip(), row[1].strip(), float(row[2])))
        except ValueError:
            raise DataError(f"edge list line {lineno}: bad weight {row[2]!r}") from None
    if labels is None:
        seen: dict[str, None] = {}
        for a, b, _ in raw:
            seen.setdefault(a)
            seen.setdefault(b)
        labels = list(seen)
    index = {label: k for k, label in enumerate(labels)}
    try:
        edges = tuple((index[a], index[b], w) for a, b, w in raw)
    except KeyError as exc:
        raise DataError(f"edge list mentions unknown vertex {exc.args[0]!r}") from None
    return FilteredGraph(tuple(labels), edges, kind)


def write_graphml(graph: FilteredGraph, out: IO[str]) -> None:
    ns = "http://graphml.graphdrawing.org/xmlns"
    root = ET.Element("graphml", {"xmlns": ns})
    ET.SubElement(root, "key", {"id": "weight", "for": "edge", "attr.name": "weight", "attr.type": "double"})
    ET.SubElement(root, "key", {"id": "kind", "for": "graph", "attr.name": "kind", "attr.type": "string"})
    g = ET.SubElement(root, "graph", {"id": "G", "edgedefault": "undirected"})
    ET.SubElement(g, "data", {"key": "kind"}).text = graph.kind.value
    for label in graph.labels:
        ET.SubElement(g, "node", {"id": label})
    for i, j, w in graph.edges:
        e = ET.SubElement(g, "edge", {"source": graph.labels[i], "target": graph.labels[j]})
        ET.SubElement(e, "data", {"key": "weight"}).text = repr(w)
    ET.indent(root)
    out.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    out.write(ET.tostring(root, encoding="unicode"))
    out.write("\n")


def read_graphml(source: str | Path | IO[str]) -> FilteredGraph:
    tree = ET.parse(source)
    ns = {"g": "http://graphml.graphdrawing.org/xmlns"}
    graph = tree.getroot().find("g:graph", ns)
    if graph is None:
        raise DataError("no <graph> element in GraphML")
    kind_el = graph.find("g:data[@key='kind']", ns)
    labels = [node.get("id") for node in graph.findall("g:node", ns)]
    index = {label: k for k, label in enumerate(labels)}
    edges = []
    for e in graph.findall("g:edge", ns):
        w = e.find("g:data[@key='weight']", ns)
        edges.append((index[e.get("source")], index[e.get("target")], float(w.text) if w is not None else 1.0))
    kind = kind_el.text if kind_el is not None else GraphKind.OTHER
    return FilteredGraph(tuple(labels), tuple(edges), kind)


def graph_from_pairs(labels: Sequence[str], pairs: Iterable[tuple[int, int]],
                     weight: float = 1.0) -> FilteredGraph:
    """Convenience constructor for unweighted graphs."""
    return FilteredGraph(tuple(labels), tuple((i, j, weight) for i, j in pairs))
