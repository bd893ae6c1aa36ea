"""Exhaustive reference implementations.

Everything here is exponential on purpose and guarded by hard size limits;
an oversized request raises ``OracleGuardError`` instead of truncating.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import networkx as nx
import numpy as np
from numba import njit

from .field import gmul, mul, mul_arrays
from .graph import Bipartition, Graph


class OracleGuardError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# subtrees, paths, matchings, spanning trees


def iter_subtrees(g: Graph, max_nodes: int) -> Iterator[tuple[frozenset[int], frozenset[tuple[int, int]]]]:
    """Every subtree of g with at most ``max_nodes`` vertices, exactly once."""
    level = {(frozenset([v]), frozenset()) for v in range(g.n)}
    size = 1
    while level and size <= max_nodes:
        yield from level
        if size == max_nodes:
            return
        nxt = set()
        for verts, edges in level:
            for u in verts:
                for v in g.adj[u]:
                    if v not in verts:
                        nxt.add((verts | {v}, edges | {(min(u, v), max(u, v))}))
        level = nxt
        size += 1


def tree_leaves(verts: Iterable[int], edges: Iterable[tuple[int, int]]) -> list[int]:
    deg = {v: 0 for v in verts}
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    if len(deg) == 1:
        return []
    return [v for v, d in deg.items() if d == 1]


def brute_tree(g: Graph, k: int, l: int) -> tuple[bool, frozenset[int] | None]:
    """Is there a subtree with k vertices and exactly l leaves?  (+ witness vertices)"""
    if k < 1 or k > g.n:
        return False, None
    if math.comb(g.n, k) > 10**7:
        raise OracleGuardError("C(n, k) exceeds 10^7")
    for verts, edges in iter_subtrees(g, k):
        if len(verts) == k and len(tree_leaves(verts, edges)) == l:
            return True, verts
    return False, None


def witness_trees(g: Graph, k: int, l: int) -> list[tuple[frozenset[int], frozenset[tuple[int, int]]]]:
    if math.comb(g.n, k) > 10**7:
        raise OracleGuardError("C(n, k) exceeds 10^7")
    return [(vs, es) for vs, es in iter_subtrees(g, k)
            if len(vs) == k and len(tree_leaves(vs, es)) == l]


def brute_path(g: Graph, k: int) -> bool:
    """Simple path on exactly k vertices."""
    if g.n > 12:
        raise OracleGuardError("n > 12")
    if k < 1 or k > g.n:
        return False
    if k == 1:
        return True

    def extend(v, seen, left):
        if left == 0:
            return True
        return any(u not in seen and extend(u, seen | {u}, left - 1) for u in g.adj[v])

    return any(extend(v, {v}, k - 1) for v in range(g.n))


def brute_weighted_path(g: Graph, w: Sequence[int], k: int, W: int) -> bool:
    """Simple path with at most k vertices and total weight at least W."""
    if g.n > 12:
        raise OracleGuardError("n > 12")

    def extend(v, seen, weight):
        if weight >= W:
            return True
        if len(seen) == k:
            return False
        return any(u not in seen and extend(u, seen | {u}, weight + w[u]) for u in g.adj[v])

    return k >= 1 and any(extend(v, {v}, w[v]) for v in range(g.n))


def brute_matching(g: Graph) -> int:
    if g.n > 12:
        raise OracleGuardError("n > 12")

    @lru_cache(maxsize=None)
    def best(free: frozenset[int]) -> int:
        if not free:
            return 0
        v = min(free)
        rest = free - {v}
        res = best(rest)
        for u in g.adj[v]:
            if u in rest:
                res = max(res, 1 + best(rest - {u}))
        return res

    return best(frozenset(range(g.n)))


def max_internal_spanning(g: Graph) -> int:
    """Largest number of internal vertices over spanning trees; -1 if disconnected."""
    if g.n > 8:
        raise OracleGuardError("n > 8")
    if not g.is_connected():
        return -1
    if g.n <= 2:
        return 0
    best = 0
    for t in nx.SpanningTreeIterator(g.to_networkx()):
        internal = sum(1 for v in t.nodes if t.degree(v) >= 2)
        best = max(best, internal)
        if best == g.n - 2:
            break
    return best


def brute_kist(g: Graph, k: int) -> bool:
    """Spanning tree with at least k internal vertices."""
    mi = max_internal_spanning(g)
    return mi >= 0 and mi >= k


# ---------------------------------------------------------------------------
# labellable elements


def labellable_set(g: Graph, edges: Iterable[tuple[int, int]], part: Bipartition,
                   verts: Iterable[int] | None = None) -> frozenset:
    """Leaves, internal vertices on side 1, and edges with both ends on side 2.

    Vertices are returned as ints, edges as sorted pairs.
    """
    edges = [(min(u, v), max(u, v)) for u, v in edges]
    vs = set(verts) if verts is not None else {x for e in edges for x in e}
    for u, v in edges:
        if not g.has_edge(u, v):
            raise ValueError(f"({u}, {v}) is not an edge of the graph")
    t = nx.Graph()
    t.add_nodes_from(vs)
    t.add_edges_from(edges)
    if not nx.is_tree(t):
        raise ValueError("not a tree")
    side = part.side
    leaves = set(tree_leaves(vs, edges))
    out = set(leaves)
    out |= {v for v in vs if v not in leaves and side[v] == 1}
    out |= {e for e in edges if side[e[0]] == 2 and side[e[1]] == 2}
    return frozenset(out)


# ---------------------------------------------------------------------------
# branching walks


@dataclass(frozen=True)
class RootedWalk:
    """Rooted tree on nodes 0..k-1 (0 is the root) with a homomorphism into g."""

    parent: tuple[int, ...]
    image: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.parent)

    def children(self, x: int) -> list[int]:
        return [y for y in range(1, self.size) if self.parent[y] == x]

    @property
    def leaves(self) -> list[int]:
        return [x for x in range(1, self.size) if not self.children(x)]

    @property
    def internal(self) -> list[int]:
        return [x for x in range(self.size) if self.children(x) or (x == 0 and self.size == 1)]

    def depth(self, x: int) -> int:
        d = 0
        while self.parent[x] >= 0:
            x = self.parent[x]
            d += 1
        return d

    def is_homomorphism(self, g: Graph) -> bool:
        return all(g.has_edge(self.image[x], self.image[self.parent[x]]) for x in range(1, self.size))

    def weakly_simple(self) -> bool:
        return all(len({self.image[c] for c in self.children(x)}) == len(self.children(x))
                   for x in range(self.size))

    def uturn_free(self) -> bool:
        return all(self.image[c] != self.image[self.parent[x]]
                   for x in range(1, self.size) for c in self.children(x))

    def simple(self) -> bool:
        return len(set(self.image)) == self.size

    def properly_ordered(self) -> bool:
        """The identity numbering satisfies the depth / parent-order / sibling-image rules."""
        n = self.size
        for a in range(n):
            for b in range(n):
                if a == b:
                    continue
                if self.depth(a) < self.depth(b) and not a < b:
                    return False
                if a and b and self.parent[a] < self.parent[b] and not a < b:
                    return False
                if a and b and self.parent[a] == self.parent[b] and self.image[a] < self.image[b] and not a < b:
                    return False
        return True

    def labellable(self, part: Bipartition) -> list[tuple[str, int]]:
        """('v', vertex) per leaf or side-1 internal node, ('e', edge) per side-2 edge."""
        side = part.side
        out = []
        leaves = set(self.leaves)
        for x in range(self.size):
            if x in leaves or (x not in leaves and side[self.image[x]] == 1):
                out.append(("v", self.image[x]))
        for x in range(1, self.size):
            u, v = self.image[x], self.image[self.parent[x]]
            if side[u] == 2 and side[v] == 2:
                out.append(("e", (min(u, v), max(u, v))))
        return out


def _nested_walks(g: Graph, v: int, parent: int, size: int, min_children: int = 0):
    """Nested (vertex, children) structures: weakly simple, U-turn free, children sorted."""
    if size == 1:
        if min_children == 0:
            yield (v, ())
        return
    allowed = [u for u in g.adj[v] if u != parent]
    for cnt in range(max(1, min_children), min(len(allowed), size - 1) + 1):
        for chosen in itertools.combinations(allowed, cnt):
            for sizes in _compositions(size - 1, cnt):
                subs = [list(_nested_walks(g, c, v, s)) for c, s in zip(chosen, sizes)]
                for combo in itertools.product(*subs):
                    yield (v, tuple(combo))


def _compositions(total: int, parts: int):
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _number(nested) -> RootedWalk:
    parent = [-1]
    image = [nested[0]]
    queue = [(0, nested)]
    head = 0
    while head < len(queue):
        idx, (_, kids) = queue[head]
        head += 1
        for kid in kids:
            parent.append(idx)
            image.append(kid[0])
            queue.append((len(image) - 1, kid))
    return RootedWalk(tuple(parent), tuple(image))


def enumerate_admissible_walks(g: Graph, part: Bipartition, k: int, l: int, i: int | None = None) -> list[RootedWalk]:
    """Admissible walks with k nodes, l leaves, root with >= 2 children and |la| = i.

    ``i=None`` returns every label count.
    """
    if k > 5 or g.n > 6:
        raise OracleGuardError("walk enumeration limited to k <= 5, n <= 6")
    out = []
    for v in range(g.n):
        for nested in _nested_walks(g, v, -1, k, min_children=2):
            w = _number(nested)
            if len(w.leaves) != l:
                continue
            if i is not None and len(w.labellable(part)) != i:
                continue
            out.append(w)
    return out


# ---------------------------------------------------------------------------
# direct polynomial evaluation


@njit(nogil=True)
def _perm_sum(mat, perms):
    acc = np.uint64(0)
    for p in range(perms.shape[0]):
        prod = np.uint64(1)
        for q in range(perms.shape[1]):
            prod = gmul(prod, mat[q, perms[p, q]])
        acc ^= prod
    return acc


@lru_cache(maxsize=None)
def _perms(i: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(i))), dtype=np.int64).reshape(-1, i)


def _walk_coefficient(w: RootedWalk, g: Graph, point) -> int:
    c = int(point.z[w.image[0]])
    idx = g.edge_index
    for x in range(1, w.size):
        u, v = w.image[x], w.image[w.parent[x]]
        c = mul(c, int(point.x[idx[(min(u, v), max(u, v))]]))
    return c


def _label_rows(w: RootedWalk, g: Graph, part: Bipartition, point) -> np.ndarray:
    idx = g.edge_index
    rows = []
    for kind, q in w.labellable(part):
        rows.append(point.yv[q] if kind == "v" else point.ye[idx[q]])
    return np.array(rows, dtype=np.uint64).reshape(len(rows), -1)


def walk_monomial_sum(w: RootedWalk, g: Graph, part: Bipartition, point, subset: Sequence[int] | None = None) -> int:
    """sum of mon(B, l) over bijective labelings (``subset=None``) or all maps into ``subset``."""
    coeff = _walk_coefficient(w, g, point)
    rows = _label_rows(w, g, part, point)
    i = rows.shape[0]
    if subset is None:
        if i > point.r:
            raise ValueError("labels exceed the point's label range")
        labelled = int(_perm_sum(np.ascontiguousarray(rows[:, :i]), _perms(i)))
    else:
        labelled = 1
        cols = [t - 1 for t in subset]
        for q in range(i):
            s = 0
            for t in cols:
                s ^= int(rows[q, t])
            labelled = mul(labelled, s)
    return mul(coeff, labelled)


def brute_poly_eval(g: Graph, part: Bipartition, k: int, l: int, r: int, point,
                    subset: Sequence[int] | None = None, walks: list[RootedWalk] | None = None) -> np.ndarray:
    """P_i (bijective labelings) or P_i^X for i = 0..r by direct summation over walks."""
    out = np.zeros(r + 1, dtype=np.uint64)
    if walks is None:
        walks = enumerate_admissible_walks(g, part, k, l)
    for w in walks:
        i = len(w.labellable(part))
        if i > r:
            continue
        out[i] ^= np.uint64(walk_monomial_sum(w, g, part, point, subset))
    return out


def subset_tables(g: Graph, part: Bipartition, r: int, point, walks: list[RootedWalk]) -> np.ndarray:
    """(2^r, r+1) table of P_i^X for every bitmask X, summed over ``walks``.

    Same quantity as ``brute_poly_eval(..., subset=X)`` for every X at once.
    """
    masks = 1 << r
    idx = g.edge_index

    def sums(row):
        s = np.zeros(masks, dtype=np.uint64)
        for mask in range(1, masks):
            low = (mask & -mask).bit_length() - 1
            s[mask] = s[mask & (mask - 1)] ^ row[low]
        return s

    cache: dict = {}
    table = np.zeros((masks, r + 1), dtype=np.uint64)
    for w in walks:
        la = w.labellable(part)
        i = len(la)
        if i > r:
            continue
        acc = np.full(masks, _walk_coefficient(w, g, point), dtype=np.uint64)
        for kind, q in la:
            key = (kind, q)
            if key not in cache:
                row = point.yv[q] if kind == "v" else point.ye[idx[q]]
                cache[key] = sums(row[:r])
            acc = mul_arrays(acc, cache[key])
        table[:, i] ^= acc
    return table


def nonsimple_sum(g: Graph, part: Bipartition, k: int, l: int, r: int, point,
                  walks: list[RootedWalk] | None = None) -> np.ndarray:
    """Bijective-labeling sum restricted to non-simple admissible walks, per i."""
    if walks is None:
        walks = enumerate_admissible_walks(g, part, k, l)
    return brute_poly_eval(g, part, k, l, r, point, walks=[w for w in walks if not w.simple()])
