import itertools

import networkx as nx
import numpy as np
import pytest

from treesieve.field import mul
from treesieve.graph import Bipartition, Graph
from treesieve.oracle import (
    OracleGuardError,
    RootedWalk,
    brute_kist,
    brute_matching,
    brute_path,
    brute_poly_eval,
    brute_tree,
    brute_weighted_path,
    enumerate_admissible_walks,
    iter_subtrees,
    labellable_set,
    max_internal_spanning,
    nonsimple_sum,
    subset_tables,
    tree_leaves,
    witness_trees,
    walk_monomial_sum,
)
from treesieve.sieve import EvaluationPoint

from conftest import connected_graphs, graph_of


def test_subtrees_of_complete_graph_follow_cayley():
    g = graph_of(nx.complete_graph(5))
    by_size = {}
    for verts, edges in iter_subtrees(g, 5):
        assert len(edges) == len(verts) - 1
        by_size[len(verts)] = by_size.get(len(verts), 0) + 1
    # C(5, s) * s^(s-2) labelled trees on each s-subset
    assert by_size == {1: 5, 2: 10, 3: 30, 4: 80, 5: 125}


def test_subtrees_are_induced_trees_of_networkx(rng):
    h = nx.gnp_random_graph(6, 0.5, seed=5)
    g = graph_of(h)
    seen = set()
    for verts, edges in iter_subtrees(g, 4):
        t = nx.Graph(list(edges))
        t.add_nodes_from(verts)
        assert nx.is_tree(t)
        assert all(h.has_edge(u, v) for u, v in edges)
        seen.add((verts, edges))
    assert len(seen) == sum(1 for _ in iter_subtrees(g, 4))


def test_tree_leaves():
    assert tree_leaves([0], []) == []
    assert sorted(tree_leaves([0, 1, 2, 3], [(0, 1), (0, 2), (0, 3)])) == [1, 2, 3]


@pytest.mark.parametrize("h, k, l, expected", [
    (nx.star_graph(3), 4, 3, True),
    (nx.star_graph(3), 4, 2, False),
    (nx.path_graph(5), 5, 2, True),
    (nx.path_graph(5), 4, 3, False),
    (nx.cycle_graph(5), 5, 2, True),
    (nx.complete_graph(4), 4, 3, True),
    (nx.petersen_graph(), 10, 2, True),
    (nx.path_graph(5), 5, 3, False),
])
def test_brute_tree_examples(h, k, l, expected):
    found, verts = brute_tree(graph_of(h), k, l)
    assert found is expected
    assert (verts is not None and len(verts) == k) is expected


def test_witness_trees_count():
    # four spanning paths and no spanning stars in C4; four stars in K4
    assert len(witness_trees(graph_of(nx.cycle_graph(4)), 4, 2)) == 4
    assert len(witness_trees(graph_of(nx.complete_graph(4)), 4, 3)) == 4


def test_brute_path_matches_hamiltonicity_facts():
    assert not brute_path(graph_of(nx.star_graph(3)), 3 + 1)
    assert brute_path(graph_of(nx.petersen_graph()), 10)
    assert not brute_path(graph_of(nx.complete_bipartite_graph(2, 4)), 6)
    assert brute_path(graph_of(nx.complete_bipartite_graph(2, 4)), 5)
    with pytest.raises(OracleGuardError):
        brute_path(graph_of(nx.path_graph(13)), 3)


def test_brute_weighted_path():
    g = graph_of(nx.path_graph(4))
    w = [1, 5, 1, 1]
    assert brute_weighted_path(g, w, 2, 6)
    assert not brute_weighted_path(g, w, 2, 7)
    assert brute_weighted_path(g, w, 3, 7)
    assert brute_weighted_path(g, w, 1, 5)


def test_brute_matching_matches_networkx():
    for seed in range(20):
        h = nx.gnp_random_graph(8, 0.35, seed=seed)
        assert brute_matching(graph_of(h)) == len(nx.max_weight_matching(h, maxcardinality=True))


@pytest.mark.parametrize("h, expected", [
    (nx.path_graph(6), 4),
    (nx.star_graph(5), 1),
    (nx.complete_graph(5), 3),
    (nx.cycle_graph(7), 5),
    (nx.path_graph(2), 0),
])
def test_max_internal_spanning(h, expected):
    assert max_internal_spanning(graph_of(h)) == expected


def test_brute_kist_on_disconnected_graph():
    g = Graph.from_edges(4, [(0, 1), (2, 3)])
    assert max_internal_spanning(g) == -1
    assert not brute_kist(g, 0)


def test_max_internal_spanning_agrees_with_exhaustive_edge_subsets():
    for g in connected_graphs(5, min_n=3):
        best = 0
        for es in itertools.combinations(g.edges, g.n - 1):
            t = nx.Graph(list(es))
            t.add_nodes_from(range(g.n))
            if nx.is_tree(t):
                best = max(best, sum(1 for v in t if t.degree(v) >= 2))
        assert max_internal_spanning(g) == best


def test_labellable_set_definition():
    g = graph_of(nx.path_graph(4))
    part = Bipartition.from_v1(4, [1])
    la = labellable_set(g, [(0, 1), (1, 2), (2, 3)], part)
    # leaves 0, 3; internal 1 on side 1; edge 2-3 has both ends on side 2
    assert la == frozenset({0, 3, 1, (2, 3)})
    with pytest.raises(ValueError):
        labellable_set(g, [(0, 2)], part)
    with pytest.raises(ValueError):
        labellable_set(graph_of(nx.cycle_graph(3)), [(0, 1), (1, 2), (0, 2)], part)


def test_rooted_walk_predicates():
    g = graph_of(nx.cycle_graph(3))
    w = RootedWalk((-1, 0, 0, 1, 2), (0, 1, 2, 2, 1))
    assert w.is_homomorphism(g)
    assert w.weakly_simple() and w.uturn_free() and not w.simple()
    assert w.leaves == [3, 4] and w.internal == [0, 1, 2]
    assert w.depth(4) == 2
    bad = RootedWalk((-1, 0, 1), (0, 1, 0))
    assert not bad.uturn_free()
    twins = RootedWalk((-1, 0, 0), (0, 1, 1))
    assert not twins.weakly_simple()
    unordered = RootedWalk((-1, 0, 0), (0, 2, 1))
    assert not unordered.properly_ordered()


def test_walk_labellable_agrees_with_tree_labellable(rng):
    g = graph_of(nx.complete_graph(5))
    for _ in range(20):
        part = Bipartition.random(5, rng)
        for w in enumerate_admissible_walks(g, part, 4, 2):
            if not w.simple():
                continue
            edges = [(w.image[x], w.image[w.parent[x]]) for x in range(1, w.size)]
            items = {q for _, q in w.labellable(part)}
            assert items == set(labellable_set(g, edges, part))


def test_simple_walks_count_trees_once_per_internal_root(rng):
    for g in connected_graphs(5, min_n=3):
        part = Bipartition.random(g.n, rng)
        for k in (3, 4):
            for l in range(2, k):
                walks = enumerate_admissible_walks(g, part, k, l)
                for w in walks:
                    assert w.weakly_simple() and w.uturn_free() and w.properly_ordered()
                    assert len(w.children(0)) >= 2
                simple = sum(1 for w in walks if w.simple())
                expected = sum(k - l for _ in witness_trees(g, k, l))
                assert simple == expected


def test_walk_enumeration_guard():
    with pytest.raises(OracleGuardError):
        enumerate_admissible_walks(graph_of(nx.path_graph(7)), Bipartition.from_v1(7, []), 3, 2)


def test_subset_tables_match_per_subset_evaluation(rng):
    g = graph_of(nx.complete_graph(4))
    part = Bipartition.from_v1(4, [0, 1])
    walks = enumerate_admissible_walks(g, part, 4, 2)
    r = 4
    pt = EvaluationPoint.random(g, r, rng)
    table = subset_tables(g, part, r, pt, walks)
    for mask in range(1, 1 << r):
        subset = [t + 1 for t in range(r) if mask >> t & 1]
        assert np.array_equal(table[mask], brute_poly_eval(g, part, 4, 2, r, pt, subset=subset, walks=walks))


def test_monomial_sum_over_all_maps_is_product_of_sums(rng):
    g = graph_of(nx.path_graph(3))
    part = Bipartition.from_v1(3, [1])
    w = RootedWalk((-1, 0, 0), (1, 0, 2))
    pt = EvaluationPoint.random(g, 3, rng)
    # leaves 0, 2 and the side-1 root; no edge has both ends on side 2
    assert len(w.labellable(part)) == 3
    expect = mul(mul(int(pt.z[1]), int(pt.x[0])), int(pt.x[1]))
    for q in (1, 0, 2):
        expect = mul(expect, int(pt.yv[q, 0] ^ pt.yv[q, 1] ^ pt.yv[q, 2]))
    assert walk_monomial_sum(w, g, part, pt, subset=[1, 2, 3]) == expect


def test_nonsimple_sum_cancels_on_triangle(rng):
    g = graph_of(nx.complete_graph(3))
    for _ in range(5):
        part = Bipartition.random(3, rng)
        walks = enumerate_admissible_walks(g, part, 5, 2)
        assert walks and not any(w.simple() for w in walks)
        pt = EvaluationPoint.random(g, 6, rng)
        assert not nonsimple_sum(g, part, 5, 2, 6, pt, walks=walks).any()
        assert not brute_poly_eval(g, part, 5, 2, 6, pt, walks=walks).any()


def test_direct_sum_nonzero_iff_witness_with_that_label_count(rng):
    # terms with different i carry different numbers of y-variables, so each
    # P_i is nonzero exactly when some witness has |la| = i
    checked = 0
    for g in connected_graphs(5, min_n=3):
        for k, l in [(3, 2), (4, 2), (4, 3)]:
            if k > g.n:
                continue
            r = k + l - 1
            for _ in range(3):
                part = Bipartition.random(g.n, rng)
                walks = enumerate_admissible_walks(g, part, k, l)
                seen = np.zeros(r + 1, dtype=bool)
                for _ in range(50):
                    seen |= brute_poly_eval(g, part, k, l, r, EvaluationPoint.random(g, r, rng), walks=walks) != 0
                counts = {len(labellable_set(g, es, part, vs)) for vs, es in witness_trees(g, k, l)}
                assert set(np.flatnonzero(seen)) == counts
                checked += 1
    assert checked > 100
