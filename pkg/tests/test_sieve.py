import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treesieve import field as F
from treesieve.graph import Bipartition, Graph
from treesieve.oracle import brute_poly_eval, enumerate_admissible_walks
from treesieve.sieve import (
    EvaluationPoint,
    LabelSums,
    SieveInstance,
    dp_evaluate,
    evaluate_by_label,
    evaluate_P,
    evaluate_weighted,
    gray_code_subsets,
    interpolate,
    label_sums,
    poly_eval,
    weighted_degree,
    workspace_bytes,
)

from conftest import graph_of


def _inst(h, k, l, r, part=None):
    g = graph_of(h) if isinstance(h, nx.Graph) else h
    part = part if part is not None else Bipartition.from_v1(g.n, range(0, g.n, 2))
    return SieveInstance(g, part, k, l, r)


def test_label_sums_match_direct_xor(rng):
    g = graph_of(nx.cycle_graph(4))
    pt = EvaluationPoint.random(g, 4, rng)
    sv, se = label_sums(pt, [1, 3])
    assert np.array_equal(sv, pt.yv[:, 0] ^ pt.yv[:, 2])
    assert np.array_equal(se, pt.ye[:, 0] ^ pt.ye[:, 2])


def test_label_sums_toggle_is_involution(rng):
    g = graph_of(nx.path_graph(3))
    pt = EvaluationPoint.random(g, 3, rng)
    ls = LabelSums(pt, [2])
    ls.toggle(3)
    ls.toggle(3)
    ls.toggle(2)
    assert not ls.vertex.any() and not ls.edge.any() and ls.subset == set()
    with pytest.raises(ValueError):
        ls.toggle(4)


@pytest.mark.parametrize("r", [1, 2, 5, 8])
def test_gray_code_visits_each_nonempty_subset_once(r):
    seen = set()
    prev = 0
    for t, mask in gray_code_subsets(r):
        assert prev ^ mask == 1 << (t - 1)
        seen.add(mask)
        prev = mask
    assert seen == set(range(1, 1 << r))


def test_instance_validation():
    g = graph_of(nx.path_graph(4))
    part = Bipartition.from_v1(4, [0])
    with pytest.raises(ValueError):
        SieveInstance(g, part, 2, 2, 2)
    with pytest.raises(ValueError):
        SieveInstance(g, part, 4, 4, 4)
    with pytest.raises(ValueError):
        SieveInstance(g, part, 4, 2, 8)
    with pytest.raises(ValueError):
        SieveInstance(g, Bipartition.from_v1(3, [0]), 4, 2, 4)


def test_edgeless_graph_evaluates_to_zero(rng):
    g = Graph.from_edges(4, [])
    inst = SieveInstance(g, Bipartition.from_v1(4, [0]), 3, 2, 3)
    pt = EvaluationPoint.random(g, 3, rng)
    assert not dp_evaluate(inst, pt, [1, 2]).any()
    assert evaluate_P(inst, pt) == 0


@pytest.mark.parametrize("h, k, l, r", [
    (nx.path_graph(3), 3, 2, 3),
    (nx.complete_graph(3), 3, 2, 4),
    (nx.star_graph(3), 4, 3, 5),
    (nx.cycle_graph(4), 4, 2, 4),
    (nx.complete_graph(4), 4, 3, 5),
])
def test_dp_matches_walk_enumeration(h, k, l, r, rng):
    inst = _inst(h, k, l, r)
    walks = enumerate_admissible_walks(inst.g, inst.part, k, l)
    for _ in range(3):
        pt = EvaluationPoint.random(inst.g, r, rng)
        for subset in ([1], [2, 3], list(range(1, r + 1))):
            expect = brute_poly_eval(inst.g, inst.part, k, l, r, pt, subset=subset, walks=walks)
            assert np.array_equal(dp_evaluate(inst, pt, subset), expect)
        assert np.array_equal(evaluate_by_label(inst, pt),
                              brute_poly_eval(inst.g, inst.part, k, l, r, pt, walks=walks))


def test_per_subset_table_assembles_bijective_sums(rng):
    inst = _inst(nx.cycle_graph(4), 4, 2, 4)
    pt = EvaluationPoint.random(inst.g, 4, rng)
    total, table = evaluate_by_label(inst, pt, per_subset=True)
    for i in range(inst.r + 1):
        acc = np.uint64(0)
        for mask in range(1, 1 << inst.r):
            if mask >> i == 0:
                acc ^= table[mask, i]
        assert acc == total[i]
    for mask in (1, 5, 15):
        subset = [t + 1 for t in range(inst.r) if mask >> t & 1]
        assert np.array_equal(table[mask], dp_evaluate(inst, pt, subset))


@pytest.mark.parametrize("h, k, l", [
    (nx.star_graph(3), 4, 2),
    (nx.path_graph(6), 4, 3),
    (nx.cycle_graph(6), 5, 3),
    (nx.complete_graph(4), 5, 2),
])
def test_no_instance_is_identically_zero(h, k, l, rng):
    g = graph_of(h)
    for _ in range(100):
        part = Bipartition.random(g.n, rng)
        r = k + l - 1
        pt = EvaluationPoint.random(g, r, rng)
        assert evaluate_P(SieveInstance(g, part, k, l, r), pt) == 0


def test_yes_instance_hits_often_under_full_budget(rng):
    g = graph_of(nx.path_graph(5))
    part = Bipartition.random(g.n, rng)
    inst = SieveInstance(g, part, 4, 2, 5)
    hits = sum(evaluate_P(inst, EvaluationPoint.random(g, 5, rng)) != 0 for _ in range(200))
    assert hits >= 100


def test_relabelling_vertices_preserves_values(rng):
    h = nx.gnp_random_graph(7, 0.5, seed=11)
    g = graph_of(h)
    perm = rng.permutation(g.n)
    g2 = Graph.from_edges(g.n, [(int(perm[u]), int(perm[v])) for u, v in g.edges])
    part = Bipartition.random(g.n, rng)
    side2 = np.empty_like(part.side)
    side2[perm] = part.side
    part2 = Bipartition(side2)
    r = 5
    pt = EvaluationPoint.random(g, r, rng)
    emap = [g2.edge_index[tuple(sorted((int(perm[u]), int(perm[v]))))] for u, v in g.edges]
    x2 = np.zeros_like(pt.x)
    ye2 = np.zeros_like(pt.ye)
    x2[emap] = pt.x
    ye2[emap] = pt.ye
    yv2 = np.zeros_like(pt.yv)
    z2 = np.zeros_like(pt.z)
    yv2[perm] = pt.yv
    z2[perm] = pt.z
    pt2 = EvaluationPoint(x2, yv2, ye2, z2)
    a = evaluate_by_label(SieveInstance(g, part, 5, 3, r), pt)
    b = evaluate_by_label(SieveInstance(g2, part2, 5, 3, r), pt2)
    assert np.array_equal(a, b)


def test_workspace_is_polynomial_in_r():
    g = graph_of(nx.random_regular_graph(3, 40, seed=1))
    sizes = [workspace_bytes(g, 8, 3, r) for r in range(3, 12)]
    for r, (a, b) in zip(range(3, 12), zip(sizes, sizes[1:])):
        assert b * (r + 1) == a * (r + 2)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, F.MASK), min_size=1, max_size=6), st.integers(0, F.MASK))
def test_interpolation_roundtrip(coeffs, x):
    xs = list(range(1, len(coeffs) + 1))
    ys = [poly_eval(coeffs, t) for t in xs]
    assert interpolate(xs, ys) == coeffs
    assert poly_eval(interpolate(xs, ys), x) == poly_eval(coeffs, x)


def test_interpolation_rejects_repeated_nodes():
    with pytest.raises(ValueError):
        interpolate([1, 1], [2, 3])


def test_unit_weights_put_everything_at_k(rng):
    g = graph_of(nx.path_graph(5)).with_weights([1] * 5)
    inst = SieveInstance(g, Bipartition.random(5, rng), 4, 2, 5)
    coeffs = evaluate_weighted(inst, EvaluationPoint.random(g, 5, rng), 4)
    assert weighted_degree(inst) == 4
    assert coeffs[4] != 0
    assert not any(coeffs[:4])


def test_weighted_path_lands_on_its_weight(rng):
    g = graph_of(nx.path_graph(3)).with_weights([1, 2, 1])
    inst = SieveInstance(g, Bipartition.from_v1(3, [1]), 3, 2, 4)
    coeffs = evaluate_weighted(inst, EvaluationPoint.random(g, 4, rng), 3)
    assert len(coeffs) == 5
    assert coeffs[4] != 0
    assert not any(coeffs[:4])


def test_weighted_requires_weights(rng):
    g = graph_of(nx.path_graph(3))
    inst = SieveInstance(g, Bipartition.from_v1(3, [1]), 3, 2, 3)
    with pytest.raises(ValueError):
        evaluate_weighted(inst, EvaluationPoint.random(g, 3, rng), 3)
