import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from corrnet.corr import CorrelationMatrix
from corrnet.errors import DataError
from corrnet.filtgraph import FilteredGraph, graph_from_pairs, pmfg
from corrnet.mapeq import WEIGHT_FLOOR, Partition, detect_communities, map_equation, one_module_codelength
from corrnet.synth import FactorSpec
from oracles import random_correlation


def entropy_bits(ps):
    total = sum(ps)
    return -sum(p / total * math.log2(p / total) for p in ps if p > 0) if total > 0 else 0.0


def map_equation_oracle(n, edges, assignment, unweighted=False):
    """Two-level map equation written as q H(Q) + sum_m p_m H(P_m)."""
    strength = [0.0] * n
    cut = {}
    for i, j, w in edges:
        w = 1.0 if unweighted else max(w, WEIGHT_FLOOR)
        strength[i] += w
        strength[j] += w
        if assignment[i] != assignment[j]:
            cut[assignment[i]] = cut.get(assignment[i], 0.0) + w
            cut[assignment[j]] = cut.get(assignment[j], 0.0) + w
    two_w = sum(strength)
    modules = sorted(set(assignment))
    q = {m: cut.get(m, 0.0) / two_w for m in modules}
    q_total = sum(q.values())
    length = q_total * entropy_bits(list(q.values()))
    for m in modules:
        rates = [strength[v] / two_w for v in range(n) if assignment[v] == m]
        p_m = q[m] + sum(rates)
        length += p_m * entropy_bits([q[m], *rates])
    return length


def cliques_with_bridge():
    pairs = list(combinations(range(5), 2)) + list(combinations(range(5, 10), 2)) + [(4, 5)]
    return graph_from_pairs([f"n{k}" for k in range(10)], pairs)


def planted_pmfg(seed, blocks=4, size=14, t=500):
    spec = FactorSpec.equal_blocks(blocks, size, t, 0.6, 0.1, seed)
    rng = np.random.default_rng(seed)
    c = np.corrcoef(np.linalg.cholesky(spec.population_matrix()) @ rng.standard_normal((blocks * size, t)))
    return pmfg(CorrelationMatrix([f"s{k:02d}" for k in range(blocks * size)], c)), spec


def test_complete_graph_single_module_is_log2_n():
    for n in (3, 5, 10, 17):
        g = graph_from_pairs(range(n), combinations(range(n), 2))
        assert one_module_codelength(g, "unweighted") == pytest.approx(math.log2(n), abs=1e-12)
        singletons = map_equation(g, list(range(n)), "unweighted")
        assert singletons > math.log2(n)


def test_bridge_cliques_prefer_two_modules():
    g = cliques_with_bridge()
    two = map_equation(g, [0] * 5 + [1] * 5)
    one = map_equation(g, [0] * 10)
    assert two < one
    assert two == pytest.approx(map_equation_oracle(10, g.edges, [0] * 5 + [1] * 5), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(4, 25), st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_codelength_matches_entropy_form(n, seed, k):
    rng = np.random.default_rng(seed)
    g = pmfg(random_correlation(n, rng))
    assignment = rng.integers(0, k, n).tolist()
    for unweighted in (False, True):
        got = map_equation(g, assignment, "unweighted" if unweighted else "correlation")
        assert got == pytest.approx(map_equation_oracle(n, g.edges, assignment, unweighted), abs=1e-10)


def test_negative_weights_are_floored():
    g = FilteredGraph(("a", "b", "c"), ((0, 1, -0.5), (1, 2, 0.5)))
    assert map_equation(g, [0, 0, 1]) == pytest.approx(
        map_equation(FilteredGraph(("a", "b", "c"), ((0, 1, WEIGHT_FLOOR), (1, 2, 0.5))), [0, 0, 1]), abs=1e-15)


def test_errors():
    disconnected = graph_from_pairs("abcd", [(0, 1), (2, 3)])
    with pytest.raises(DataError, match="disconnected"):
        map_equation(disconnected, [0, 0, 1, 1])
    with pytest.raises(DataError, match="disconnected"):
        detect_communities(disconnected)
    with pytest.raises(DataError):
        map_equation(graph_from_pairs("ab", []), [0, 0])
    with pytest.raises(DataError):
        detect_communities(cliques_with_bridge(), n_runs=0)


def test_detects_bridged_cliques():
    p = detect_communities(cliques_with_bridge(), n_runs=100, seed=42)
    assert p.n_modules == 2
    assert set(p.assignment[:5]) != set(p.assignment[5:])
    assert len(set(p.assignment[:5])) == 1 and len(set(p.assignment[5:])) == 1


def test_complete_graph_is_one_module():
    g = graph_from_pairs(range(10), combinations(range(10), 2))
    p = detect_communities(g, n_runs=100, seed=1, weighting="unweighted")
    assert p.n_modules == 1
    assert p.codelength == pytest.approx(math.log2(10), abs=1e-12)


def _local_optimum(g, p):
    base = map_equation(g, p)
    for v in range(g.n):
        for m in range(p.n_modules + 1):
            if m == p.assignment[v]:
                continue
            moved = list(p.assignment)
            moved[v] = m
            if map_equation(g, moved) < base - 1e-12:
                return False
    return True


def test_planted_blocks_recovered_and_locally_optimal():
    g, spec = planted_pmfg(3)
    p = detect_communities(g, n_runs=20, seed=42)
    assert p.n_modules == 4
    planted = {frozenset(k for k in range(g.n) if spec.block_assignment[k] == b) for b in range(4)}
    found = {frozenset(m) for m in p.modules()}
    assert found == planted
    assert p.codelength == pytest.approx(map_equation(g, p), abs=1e-9)
    assert _local_optimum(g, p)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_random_pmfg_local_optimality(seed):
    g = pmfg(random_correlation(30, np.random.default_rng(seed)))
    p = detect_communities(g, n_runs=10, seed=seed)
    assert p.codelength == pytest.approx(map_equation(g, p), abs=1e-9)
    assert _local_optimum(g, p)


def test_partition_invariants():
    g, _ = planted_pmfg(5)
    p = detect_communities(g, n_runs=10, seed=0)
    assert sorted(set(p.assignment)) == list(range(p.n_modules))
    module_flow = [sum(p.flow[v] for v in members) for members in p.modules()]
    assert module_flow == sorted(module_flow, reverse=True)
    for members in p.modules():
        assert sorted(p.flow_rank[v] for v in members) == list(range(1, len(members) + 1))
        assert [p.flow[v] for v in members] == sorted((p.flow[v] for v in members), reverse=True)
    assert sorted(p.ordering()) == sorted(g.labels)
    assert sum(p.flow) == pytest.approx(1.0, abs=1e-12)


def test_deterministic_given_seed():
    g = pmfg(random_correlation(25, np.random.default_rng(7)))
    a = detect_communities(g, n_runs=15, seed=9)
    b = detect_communities(g, n_runs=15, seed=9)
    assert a == b


def test_permutation_equivariance():
    g, _ = planted_pmfg(11)
    perm = np.random.default_rng(0).permutation(g.n)  # new index of each old vertex
    labels = [None] * g.n
    for old, new in enumerate(perm):
        labels[new] = g.labels[old]
    h = FilteredGraph(tuple(labels), tuple((perm[i], perm[j], w) for i, j, w in g.edges))
    a = detect_communities(g, n_runs=30, seed=4)
    b = detect_communities(h, n_runs=30, seed=4)
    assert b.codelength == pytest.approx(a.codelength, abs=1e-9)
    groups_a = {frozenset(g.labels[v] for v in m) for m in a.modules()}
    groups_b = {frozenset(h.labels[v] for v in m) for m in b.modules()}
    assert groups_a == groups_b
    for old, new in enumerate(perm):
        assert a.flow[old] == pytest.approx(b.flow[new], abs=1e-15)


def test_partition_object_is_accepted_by_map_equation():
    g = cliques_with_bridge()
    p = Partition(g.labels, (0,) * 10, 0.0, (0.1,) * 10, tuple(range(1, 11)))
    assert map_equation(g, p) == pytest.approx(one_module_codelength(g), abs=1e-15)
