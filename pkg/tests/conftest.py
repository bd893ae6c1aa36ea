from functools import lru_cache

import networkx as nx
import numpy as np
import pytest

from treesieve.graph import Graph

_ACCEPTANCE_LINES: list[str] = []


@lru_cache(maxsize=None)
def connected_graphs(max_n: int, min_n: int = 1) -> tuple[Graph, ...]:
    """All connected graphs on min_n..max_n vertices up to isomorphism (max_n <= 7)."""
    out = []
    for h in nx.graph_atlas_g():
        n = h.number_of_nodes()
        if min_n <= n <= max_n and nx.is_connected(h):
            out.append(Graph.from_networkx(h))
    return tuple(out)


def graph_of(h: nx.Graph) -> Graph:
    return Graph.from_networkx(nx.convert_node_labels_to_integers(h))


def random_subcubic(n: int, rng: np.random.Generator, density: float = 0.6) -> Graph:
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    rng.shuffle(pairs)
    deg = [0] * n
    edges = []
    for u, v in pairs:
        if deg[u] < 3 and deg[v] < 3 and rng.random() < density:
            edges.append((u, v))
            deg[u] += 1
            deg[v] += 1
    return Graph.from_edges(n, edges)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def record_criterion():
    def record(number: int, name: str, passed: bool, detail: str = "") -> None:
        line = f"criterion {number:2d} [{'PASS' if passed else 'FAIL'}] {name}" + (f" ({detail})" if detail else "")
        print(line)
        _ACCEPTANCE_LINES.append(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
