import networkx as nx
import numpy as np
import pytest

from treesieve.detect import DetectionPlan
from treesieve.graph import Graph
from treesieve.oracle import brute_path, brute_weighted_path
from treesieve.preprocess import (
    ContractionTrace,
    eliminate_triangles,
    find_triangle,
    kpath_subcubic,
    weighted_path_exists,
)

from conftest import graph_of, random_subcubic


def test_triangle_contracts_to_single_heavy_vertex():
    h, trace = eliminate_triangles(graph_of(nx.complete_graph(3)))
    assert h.n == 1 and h.m == 0 and h.weights == (3,)
    assert trace.steps == [((0, 1, 2), 3)]


def test_pendant_triangle():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (1, 3), (2, 3)])
    h, trace = eliminate_triangles(g)
    assert h.edges == [(0, 1)]
    assert h.weights == (1, 3)
    assert trace.final_ids == [0, 4]


def test_triangle_free_graph_is_unchanged():
    g = graph_of(nx.petersen_graph())
    h, trace = eliminate_triangles(g)
    assert h == g.with_weights([1] * g.n) and not trace.steps
    assert find_triangle(g) is None


def test_rejects_high_degree():
    with pytest.raises(ValueError):
        eliminate_triangles(graph_of(nx.star_graph(4)))


def test_result_is_triangle_free_subcubic_and_weight_preserving(rng):
    for _ in range(100):
        g = random_subcubic(int(rng.integers(3, 13)), rng, density=0.8)
        h, trace = eliminate_triangles(g)
        assert h.max_degree <= 3
        assert find_triangle(h) is None
        assert sum(h.weights) == g.n
        assert h.n == g.n - 2 * len(trace.steps)


def test_trace_json_roundtrip(rng):
    g = random_subcubic(10, rng, density=0.9)
    _, trace = eliminate_triangles(g)
    back = ContractionTrace.from_json(trace.to_json())
    assert back == trace


def test_prism_contracts_to_weighted_edge():
    # triangular prism: two triangles joined by a matching
    h, trace = eliminate_triangles(graph_of(nx.circular_ladder_graph(3)))
    assert len(trace.steps) == 2
    assert h.n == 2 and h.edges == [(0, 1)]
    assert h.weights == (3, 3)


def test_weighted_path_exists_small_cases():
    g = Graph.from_edges(3, [(0, 1), (1, 2)], [3, 1, 3])
    plan = DetectionPlan(3, 2, confidence_boost=2)
    assert weighted_path_exists(g, 1, 3, plan).answer
    assert not weighted_path_exists(g, 1, 4, plan).answer
    assert weighted_path_exists(g, 2, 4, plan).answer
    assert not weighted_path_exists(g, 2, 5, plan).answer
    assert weighted_path_exists(g, 3, 7, plan).answer
    assert not weighted_path_exists(g, 3, 8, plan).answer


@pytest.mark.parametrize("strategy", ["random", "color", "fractional"])
def test_kpath_subcubic_agrees_with_brute_force(strategy, rng):
    plan = DetectionPlan(3, 2, strategy=strategy, confidence_boost=2, seed=3)
    for _ in range(12):
        g = random_subcubic(int(rng.integers(4, 9)), rng, density=0.8)
        for k in range(1, g.n + 1):
            assert kpath_subcubic(g, k, plan).answer == brute_path(g, k), (g.edges, k)


def test_contraction_preserves_path_existence(rng):
    for _ in range(50):
        g = random_subcubic(int(rng.integers(3, 11)), rng, density=0.8)
        h, _ = eliminate_triangles(g)
        for k in range(1, g.n + 1):
            assert brute_path(g, k) == brute_weighted_path(h, h.weights, k, k)


def test_unsupported_strategy():
    g = graph_of(nx.cycle_graph(5))
    with pytest.raises(ValueError):
        kpath_subcubic(g, 4, DetectionPlan(3, 2, strategy="vector"))
