import math
from fractions import Fraction
from itertools import combinations

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import hypergeom

from corrnet.errors import DataError, DegenerateEntropyError
from corrnet.filtgraph import graph_from_pairs
from corrnet.netinfo import link_mi_from_counts, link_mutual_information, rolling_mi
from oracles import mi_by_enumeration


def _graph(n, pairs):
    return graph_from_pairs([f"v{k}" for k in range(n)], pairs)


def _disjoint_single_links_oracle():
    # four vertices, six pairs; each graph has one link and they share none
    mpmath.mp.dps = 40
    p = mpmath.mpf(1) / 6
    q = 1 - p
    i_nats = 2 * p * mpmath.log(p / (p * q)) + (1 - 2 * p) * mpmath.log((1 - 2 * p) / (q * q))
    h = -(p * mpmath.log(p) + q * mpmath.log(q))
    return float(i_nats), float(h), float(i_nats / h)


def test_disjoint_single_links():
    i_ref, h_ref, norm_ref = _disjoint_single_links_oracle()
    res = link_mutual_information(_graph(4, [(0, 1)]), _graph(4, [(2, 3)]))
    assert (res.n1, res.n2, res.n12) == (1, 1, 0)
    assert res.mutual_information == pytest.approx(i_ref, abs=1e-12)
    assert res.entropy1 == pytest.approx(h_ref, abs=1e-12)
    assert res.normalized == pytest.approx(norm_ref, abs=1e-12)
    assert res.mutual_information == pytest.approx(0.0335591, abs=1e-7)
    assert res.normalized == pytest.approx(0.0745, abs=1e-4)


def test_joint_probabilities_are_exact_fractions():
    res = link_mi_from_counts(10, 24, 20, 7)
    pairs = Fraction(45)
    expected = (7 / pairs, 17 / pairs, 13 / pairs, 1 - Fraction(37) / pairs)
    assert res.joint == pytest.approx([float(x) for x in expected], abs=1e-15)
    assert sum(res.joint) == pytest.approx(1.0, abs=1e-15)
    assert res.p11 + res.p10 == pytest.approx(2 * 24 / (100 - 10), abs=1e-15)


def test_identical_graphs_normalize_to_one():
    rng = np.random.default_rng(0)
    for n in range(3, 12):
        all_pairs = list(combinations(range(n), 2))
        for m in range(1, len(all_pairs)):
            chosen = [all_pairs[k] for k in rng.choice(len(all_pairs), m, replace=False)]
            g = _graph(n, chosen)
            assert link_mutual_information(g, g).normalized == pytest.approx(1.0, abs=1e-12)


def test_empty_graph_is_degenerate():
    with pytest.raises(DegenerateEntropyError, match="zero entropy in second graph") as info:
        link_mutual_information(_graph(4, [(0, 1)]), _graph(4, []))
    assert info.value.result.mutual_information == 0.0
    complete = _graph(4, list(combinations(range(4), 2)))
    with pytest.raises(DegenerateEntropyError, match="first"):
        link_mutual_information(complete, _graph(4, [(0, 1)]))
    lax = link_mutual_information(complete, _graph(4, [(0, 1)]), strict=False)
    assert lax.degenerate and lax.normalized is None


def test_label_mismatch():
    a = graph_from_pairs("abcd", [(0, 1)])
    b = graph_from_pairs("abce", [(0, 1)])
    with pytest.raises(DataError, match="label"):
        link_mutual_information(a, b)


def test_labels_matched_by_name_not_position():
    a = graph_from_pairs("abcd", [(0, 1), (2, 3)])
    b = graph_from_pairs("dcba", [(3, 2), (1, 0)])  # same links, vertices listed in reverse
    assert link_mutual_information(a, b).n12 == 2


def test_counts_validation():
    with pytest.raises(DataError):
        link_mi_from_counts(4, 2, 2, 3)
    with pytest.raises(DataError):
        link_mi_from_counts(4, 5, 5, 1)


def test_closed_form_matches_enumeration_exhaustively():
    # all pairs of edge sets on 4 vertices, then sampled pairs on 5..7 vertices
    rng = np.random.default_rng(1)
    checked = 0
    for n in range(2, 8):
        all_pairs = list(combinations(range(n), 2))
        m = len(all_pairs)
        if m <= 6:
            subsets = [[all_pairs[k] for k in range(m) if mask >> k & 1] for mask in range(2 ** m)]
            combos = [(a, b) for a in subsets for b in subsets]
        else:
            combos = [([p for p in all_pairs if rng.random() < 0.5], [p for p in all_pairs if rng.random() < 0.5])
                      for _ in range(1500)]
        for a, b in combos:
            res = link_mutual_information(_graph(n, a), _graph(n, b), strict=False)
            mi, hx, hy = mi_by_enumeration(n, a, b)
            assert res.mutual_information == pytest.approx(mi, abs=1e-12)
            assert res.entropy1 == pytest.approx(hx, abs=1e-12)
            assert res.entropy2 == pytest.approx(hy, abs=1e-12)
            checked += 1
    assert checked >= 4096


def test_overlap_response_is_monotone_away_from_independence():
    # n1 = n2 = 24 on 45 pairs: feasible overlaps 3..24, independence at 24 * 24 / 45 = 12.8
    ks = range(3, 25)
    values = {k: link_mi_from_counts(10, 24, 24, k).mutual_information for k in ks}
    above = [values[k] for k in ks if k >= 13]
    below = [values[k] for k in ks if k <= 13]
    assert all(b >= a for a, b in zip(above, above[1:]))
    assert all(b <= a for a, b in zip(below, below[1:]))
    assert min(values, key=values.get) == 13


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 40), st.data())
def test_symmetry_and_bounds(n, data):
    pairs = n * (n - 1) // 2
    n1 = data.draw(st.integers(0, pairs))
    n2 = data.draw(st.integers(0, pairs))
    n12 = data.draw(st.integers(max(0, n1 + n2 - pairs), min(n1, n2)))
    a = link_mi_from_counts(n, n1, n2, n12)
    b = link_mi_from_counts(n, n2, n1, n12)
    assert a.mutual_information >= 0
    assert abs(a.mutual_information - b.mutual_information) <= 1e-12
    if a.normalized is not None:
        assert abs(a.normalized - b.normalized) <= 1e-12
        assert -1e-12 <= a.normalized <= 1 + 1e-12


def test_rolling_indexes_later_graph():
    gs = [_graph(5, [(0, 1), (1, 2)]), _graph(5, [(0, 1), (2, 3)]), _graph(5, [(0, 1), (2, 3)])]
    res = rolling_mi(gs)
    assert len(res) == 2
    assert res[0].n12 == 1 and res[1].normalized == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DataError):
        rolling_mi(gs[:1])


def test_constant_sequence_is_all_ones():
    g = _graph(8, [(k, k + 1) for k in range(7)])
    assert all(r.normalized == pytest.approx(1.0, abs=1e-12) for r in rolling_mi([g] * 10))


def test_random_graphs_match_independent_expectation():
    # independent random edge sets of PMFG size: n12 is hypergeometric
    n, m = 57, 165
    pairs = n * (n - 1) // 2
    dist = hypergeom(pairs, m, m)
    ks = np.arange(0, m + 1)
    pk = dist.pmf(ks)
    vals = np.array([link_mi_from_counts(n, m, m, int(k)).normalized for k in ks])
    expect = float(np.sum(pk * vals))
    sd = math.sqrt(float(np.sum(pk * (vals - expect) ** 2)))
    rng = np.random.default_rng(4)
    all_pairs = list(combinations(range(n), 2))
    graphs = [_graph(n, [all_pairs[k] for k in rng.choice(pairs, m, replace=False)]) for _ in range(200)]
    got = np.array([r.normalized for r in rolling_mi(graphs)])
    assert abs(got.mean() - expect) <= 4 * sd / math.sqrt(len(got))
