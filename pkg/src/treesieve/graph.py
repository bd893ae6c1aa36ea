"""Undirected simple graphs, file formats, colorings and randomized helpers.

Vertices are ``0..n-1`` inside the library.  Every file format is 1-based;
the translation happens only in the readers and writers of this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import networkx as nx
import numpy as np
from numba import njit

from .field import ginv, gmul, sample


class GraphFormatError(ValueError):
    """Malformed graph, coloring, vector or partition file."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True, eq=False)
class Graph:
    n: int
    adj: tuple[tuple[int, ...], ...]
    weights: tuple[int, ...] | None = None

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], weights: Sequence[int] | None = None) -> "Graph":
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        if weights is not None:
            weights = tuple(int(w) for w in weights)
            if len(weights) != n or any(w < 1 for w in weights):
                raise ValueError("weights must be n positive integers")
        return cls(n, tuple(tuple(sorted(s)) for s in nbrs), weights)

    @cached_property
    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in self.adj[u] if u < v]

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    @property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adj), default=0)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adjsets[u]

    @cached_property
    def _adjsets(self) -> list[frozenset[int]]:
        return [frozenset(a) for a in self.adj]

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {e: i for i, e in enumerate(self.edges)}

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(indptr, nbr, eid, rev): sorted adjacency as arrays.

        Slot ``s`` in ``indptr[a]:indptr[a+1]`` is the directed edge a -> nbr[s];
        ``eid[s]`` is the undirected edge id and ``rev[s]`` the slot of b -> a.
        """
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        for a in range(self.n):
            indptr[a + 1] = indptr[a] + len(self.adj[a])
        nbr = np.zeros(indptr[-1], dtype=np.int64)
        eid = np.zeros(indptr[-1], dtype=np.int64)
        slot = {}
        idx = self.edge_index
        for a in range(self.n):
            for j, b in enumerate(self.adj[a]):
                s = indptr[a] + j
                nbr[s] = b
                eid[s] = idx[(min(a, b), max(a, b))]
                slot[(a, b)] = s
        rev = np.array([slot[(int(nbr[s]), a)] for a in range(self.n) for s in range(indptr[a], indptr[a + 1])],
                       dtype=np.int64)
        return indptr, nbr, eid, rev

    def with_weights(self, weights: Sequence[int] | None) -> "Graph":
        return Graph.from_edges(self.n, self.edges, weights)

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g

    @classmethod
    def from_networkx(cls, g: nx.Graph) -> "Graph":
        nodes = sorted(g.nodes())
        pos = {v: i for i, v in enumerate(nodes)}
        return cls.from_edges(len(nodes), [(pos[u], pos[v]) for u, v in g.edges()])

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v in self.adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == self.n

    def girth(self) -> float:
        return nx.girth(self.to_networkx())

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n, self.adj, self.weights) == (other.n, other.adj, other.weights)

    def __hash__(self):
        return hash((self.n, self.adj, self.weights))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


# ---------------------------------------------------------------------------
# vertex partitions and colorings


@dataclass(frozen=True, eq=False)
class Bipartition:
    """side[v] is 1 or 2."""

    side: np.ndarray

    def __post_init__(self):
        side = np.asarray(self.side, dtype=np.int8)
        if side.ndim != 1 or not np.all((side == 1) | (side == 2)):
            raise ValueError("every vertex must be on side 1 or 2")
        object.__setattr__(self, "side", side)

    @classmethod
    def from_v1(cls, n: int, v1: Iterable[int]) -> "Bipartition":
        side = np.full(n, 2, dtype=np.int8)
        side[list(v1)] = 1
        return cls(side)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "Bipartition":
        return cls(np.where(rng.random(n) < 0.5, 1, 2).astype(np.int8))

    @property
    def in_v1(self) -> np.ndarray:
        return self.side == 1

    def __len__(self):
        return len(self.side)

    def __eq__(self, other):
        return isinstance(other, Bipartition) and np.array_equal(self.side, other.side)


@dataclass(frozen=True)
class ProperColoring:
    """color[v] in 0..d-1 (files use 1..d)."""

    color: tuple[int, ...]
    d: int

    def validate(self, g: Graph) -> None:
        if len(self.color) != g.n:
            raise ValueError(f"coloring has {len(self.color)} entries, graph has {g.n} vertices")
        if any(not 0 <= c < self.d for c in self.color):
            raise ValueError("color out of range")
        for u, v in g.edges:
            if self.color[u] == self.color[v]:
                raise ValueError(f"edge {u + 1}-{v + 1} is monochromatic")

    def classes(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.d)]
        for v, c in enumerate(self.color):
            out[c].append(v)
        return out


@dataclass(frozen=True)
class FractionalColoring:
    """An (a:b)-coloring; colorsets[v] is a b-subset of 0..a-1."""

    a: int
    b: int
    colorsets: tuple[frozenset[int], ...]

    def validate(self, g: Graph) -> None:
        if self.b < 1 or self.a < self.b:
            raise ValueError("need 1 <= b <= a")
        if len(self.colorsets) != g.n:
            raise ValueError("fractional coloring size mismatch")
        for v, cs in enumerate(self.colorsets):
            if len(cs) != self.b or any(not 0 <= c < self.a for c in cs):
                raise ValueError(f"vertex {v + 1} needs {self.b} distinct colors in 1..{self.a}")
        for u, v in g.edges:
            if self.colorsets[u] & self.colorsets[v]:
                raise ValueError(f"edge {u + 1}-{v + 1} shares a color")


@dataclass(frozen=True, eq=False)
class VectorColoring:
    vectors: np.ndarray
    value: float

    NORM_TOL = 1e-9

    def validate(self, g: Graph) -> None:
        vec = np.asarray(self.vectors, dtype=float)
        if vec.ndim != 2 or vec.shape[0] != g.n:
            raise ValueError("vector coloring needs one vector per vertex")
        if not self.value > 1:
            raise ValueError("vector coloring value must exceed 1")
        norms = np.linalg.norm(vec, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1) > self.NORM_TOL)
        if bad.size:
            raise ValueError(f"vector of vertex {bad[0] + 1} is not unit length")
        limit = -1.0 / (self.value - 1) + self.NORM_TOL
        for u, v in g.edges:
            if float(vec[u] @ vec[v]) > limit:
                raise ValueError(f"edge {u + 1}-{v + 1} violates the vector coloring value")


def greedy_coloring(g: Graph) -> ProperColoring:
    """DSATUR coloring; uses at most max_degree + 1 colors."""
    if g.n == 0:
        return ProperColoring((), 1)
    col = nx.coloring.greedy_color(g.to_networkx(), strategy="saturation_largest_first")
    color = tuple(col[v] for v in range(g.n))
    return ProperColoring(color, max(color) + 1)


def vector_coloring_from_coloring(pc: ProperColoring) -> VectorColoring:
    """Map color classes to the vertices of a regular simplex; value d.

    For d colors the simplex vertices have pairwise inner product -1/(d-1).
    With d == 1 a single (arbitrary) unit vector is used and the value is 2.
    """
    d = max(pc.d, 2)
    basis = np.eye(d) - 1.0 / d
    basis /= np.linalg.norm(basis, axis=1, keepdims=True)
    return VectorColoring(basis[list(pc.color)] if pc.color else np.zeros((0, d)), float(d))


# ---------------------------------------------------------------------------
# randomized helpers


def sample_independent_set(g: Graph, rng: np.random.Generator) -> frozenset[int]:
    """Greedy maximal independent set along a uniformly random vertex order."""
    chosen: set[int] = set()
    for v in rng.permutation(g.n):
        v = int(v)
        if not any(u in chosen for u in g.adj[v]):
            chosen.add(v)
    return frozenset(chosen)


def hyperplane_sides(vectors: np.ndarray, rng: np.random.Generator, count: int) -> np.ndarray:
    """(count, n) booleans, True where vec(u) . h >= 0, one random normal h per row.

    A standard Gaussian vector has a uniformly random direction, so no
    normalization is needed for the sign test.
    """
    vec = np.asarray(vectors, dtype=float)
    h = rng.standard_normal((count, vec.shape[1]))
    return h @ vec.T >= 0


def hyperplane_bipartition(vc: VectorColoring, rng: np.random.Generator) -> Bipartition:
    """Side 1 iff vec(u) . h >= 0 for a uniformly random direction h."""
    side1 = hyperplane_sides(vc.vectors, rng, 1)[0]
    return Bipartition(np.where(side1, 1, 2).astype(np.int8))


@njit(nogil=True)
def _rank(mat):
    n, m = mat.shape
    rank = 0
    for col in range(m):
        piv = -1
        for r in range(rank, n):
            if mat[r, col] != 0:
                piv = r
                break
        if piv < 0:
            continue
        if piv != rank:
            for c in range(m):
                t = mat[piv, c]
                mat[piv, c] = mat[rank, c]
                mat[rank, c] = t
        scale = ginv(mat[rank, col])
        for c in range(col, m):
            mat[rank, c] = gmul(mat[rank, c], scale)
        for r in range(n):
            if r != rank and mat[r, col] != 0:
                f = mat[r, col]
                for c in range(col, m):
                    mat[r, c] ^= gmul(f, mat[rank, c])
        rank += 1
    return rank


def field_rank(mat: np.ndarray) -> int:
    return int(_rank(np.array(mat, dtype=np.uint64, copy=True)))


def matching_size(g: Graph, rng: np.random.Generator) -> int:
    """Maximum matching size via the rank of a random Tutte matrix.

    In characteristic two the Tutte matrix is symmetric with zero diagonal.
    The result never exceeds the true matching number and equals it except
    with probability at most n / 2^64.
    """
    if g.m == 0:
        return 0
    t = np.zeros((g.n, g.n), dtype=np.uint64)
    vals = sample(rng, g.m)
    for (u, v), x in zip(g.edges, vals):
        t[u, v] = x
        t[v, u] = x
    return field_rank(t) // 2


def induced_subgraph(g: Graph, s: Iterable[int]) -> tuple[Graph, list[int]]:
    """Subgraph induced by ``s`` relabelled 0..|s|-1, plus new -> old ids."""
    keep = sorted(set(int(v) for v in s))
    for v in keep:
        if not 0 <= v < g.n:
            raise ValueError(f"vertex {v} out of range")
    pos = {v: i for i, v in enumerate(keep)}
    edges = [(pos[u], pos[v]) for u, v in g.edges if u in pos and v in pos]
    weights = [g.weights[v] for v in keep] if g.weights is not None else None
    return Graph.from_edges(len(keep), edges, weights), keep


# ---------------------------------------------------------------------------
# file formats


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def _int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise GraphFormatError(f"expected an integer, got {tok!r}", lineno) from None


def parse_graph(text: str | bytes) -> Graph:
    """Parse an edge list or a DIMACS graph.

    Edge list: optional first line ``n``; lines ``u v``; lines ``w u c``
    set vertex weights.  DIMACS: ``p edge n m`` then ``e u v``; ``c``
    comments.  Duplicate edges are merged; loops are errors.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    lines = text.splitlines()
    dimacs = any(ln.lstrip().startswith(("p ", "e ")) for ln in lines)
    n: int | None = None
    raw: list[tuple[int, int, int]] = []
    weights: dict[int, int] = {}
    for lineno, line in enumerate(lines, 1):
        if dimacs:
            body = line.strip()
            if not body or body.startswith("c"):
                continue
            toks = body.split()
            if toks[0] == "p":
                if len(toks) != 4 or n is not None:
                    raise GraphFormatError("bad problem line", lineno)
                n = _int(toks[2], lineno)
            elif toks[0] == "e":
                if n is None:
                    raise GraphFormatError("edge before problem line", lineno)
                if len(toks) != 3:
                    raise GraphFormatError("edge line needs two vertices", lineno)
                raw.append((_int(toks[1], lineno), _int(toks[2], lineno), lineno))
            elif toks[0] == "w":
                if len(toks) != 3:
                    raise GraphFormatError("weight line needs vertex and weight", lineno)
                weights[_int(toks[1], lineno)] = _int(toks[2], lineno)
            else:
                raise GraphFormatError(f"unknown DIMACS line {toks[0]!r}", lineno)
            continue
        body = _strip(line)
        if not body:
            continue
        toks = body.split()
        if toks[0] == "w":
            if len(toks) != 3:
                raise GraphFormatError("weight line needs 'w vertex weight'", lineno)
            weights[_int(toks[1], lineno)] = _int(toks[2], lineno)
        elif len(toks) == 1 and n is None and not raw:
            n = _int(toks[0], lineno)
        elif len(toks) == 2:
            raw.append((_int(toks[0], lineno), _int(toks[1], lineno), lineno))
        else:
            raise GraphFormatError(f"cannot parse {body!r}", lineno)

    if n is None:
        ids = [u for u, v, _ in raw] + [v for u, v, _ in raw] + list(weights)
        n = max(ids, default=0)
    edges = []
    for u, v, lineno in raw:
        if u == v:
            raise GraphFormatError(f"loop at vertex {u}", lineno)
        for x in (u, v):
            if not 1 <= x <= n:
                raise GraphFormatError(f"vertex {x} out of range 1..{n}", lineno)
        edges.append((u - 1, v - 1))
    w = None
    if weights:
        for v, c in weights.items():
            if not 1 <= v <= n:
                raise GraphFormatError(f"weighted vertex {v} out of range 1..{n}")
            if c < 1:
                raise GraphFormatError(f"weight of vertex {v} must be positive")
        w = [weights.get(v + 1, 1) for v in range(n)]
    return Graph.from_edges(n, edges, w)


def serialize_graph(g: Graph) -> str:
    out = [str(g.n)]
    out += [f"{u + 1} {v + 1}" for u, v in g.edges]
    if g.weights is not None:
        out += [f"w {v + 1} {c}" for v, c in enumerate(g.weights)]
    return "\n".join(out) + "\n"


def read_graph(path: str | Path) -> Graph:
    return parse_graph(Path(path).read_bytes())


def write_graph(g: Graph, path: str | Path) -> None:
    Path(path).write_text(serialize_graph(g))


def _data_lines(text: str) -> list[tuple[int, list[str]]]:
    return [(i, _strip(ln).split()) for i, ln in enumerate(text.splitlines(), 1) if _strip(ln)]


def parse_coloring(text: str, g: Graph) -> ProperColoring:
    rows = _data_lines(text)
    if len(rows) != g.n:
        raise GraphFormatError(f"expected {g.n} colors, found {len(rows)}")
    color = []
    for lineno, toks in rows:
        if len(toks) != 1:
            raise GraphFormatError("one color per line", lineno)
        c = _int(toks[0], lineno)
        if c < 1:
            raise GraphFormatError("colors are 1-based", lineno)
        color.append(c - 1)
    pc = ProperColoring(tuple(color), max(color, default=0) + 1)
    pc.validate(g)
    return pc


def parse_fractional(text: str, g: Graph) -> FractionalColoring:
    rows = _data_lines(text)
    if not rows:
        raise GraphFormatError("empty fractional coloring file")
    lineno, head = rows[0]
    if len(head) != 2:
        raise GraphFormatError("header must be 'a b'", lineno)
    a, b = _int(head[0], lineno), _int(head[1], lineno)
    if len(rows) - 1 != g.n:
        raise GraphFormatError(f"expected {g.n} color sets, found {len(rows) - 1}")
    sets = []
    for lineno, toks in rows[1:]:
        cs = [_int(t, lineno) - 1 for t in toks]
        if len(cs) != b or len(set(cs)) != b:
            raise GraphFormatError(f"need {b} distinct colors", lineno)
        sets.append(frozenset(cs))
    fc = FractionalColoring(a, b, tuple(sets))
    fc.validate(g)
    return fc


def parse_vectors(text: str, g: Graph) -> VectorColoring:
    rows = _data_lines(text)
    if not rows:
        raise GraphFormatError("empty vector file")
    lineno, head = rows[0]
    if len(head) != 3:
        raise GraphFormatError("header must be 'n dim value'", lineno)
    n, dim = _int(head[0], lineno), _int(head[1], lineno)
    value = float(head[2])
    if n != g.n or len(rows) - 1 != n:
        raise GraphFormatError(f"expected {g.n} vectors")
    vec = np.zeros((n, dim))
    for i, (lineno, toks) in enumerate(rows[1:]):
        if len(toks) != dim:
            raise GraphFormatError(f"expected {dim} coordinates", lineno)
        try:
            vec[i] = [float(t) for t in toks]
        except ValueError:
            raise GraphFormatError("bad coordinate", lineno) from None
    vc = VectorColoring(vec, value)
    vc.validate(g)
    return vc


def parse_partition(text: str, g: Graph) -> Bipartition:
    rows = _data_lines(text)
    if len(rows) != g.n:
        raise GraphFormatError(f"expected {g.n} sides, found {len(rows)}")
    side = []
    for lineno, toks in rows:
        if len(toks) != 1 or toks[0] not in ("1", "2"):
            raise GraphFormatError("side must be 1 or 2", lineno)
        side.append(int(toks[0]))
    return Bipartition(np.array(side, dtype=np.int8))


def serialize_vectors(vc: VectorColoring) -> str:
    vec = np.asarray(vc.vectors)
    out = [f"{vec.shape[0]} {vec.shape[1]} {vc.value!r}"]
    out += [" ".join(repr(float(x)) for x in row) for row in vec]
    return "\n".join(out) + "\n"
