"""Evaluation of the branching-walk sieve polynomial for a fixed bipartition.

The polynomial sums, over admissible labelled branching walks with k nodes,
l leaves and at most r labellable elements, the monomial
z_root * prod x_edge * prod y_{element,label}.  Non-simple walks cancel in
characteristic two, so a nonzero value at a random point certifies a
(k, l)-tree.  Evaluation uses inclusion-exclusion over label subsets
X of {1..r}: 2^r runs of a polynomial-time dynamic program, where the run
for X feeds P_i for every i with X inside {1..i}.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import field
from ._kernels import all_subsets_kernel, dp_kernel
from .graph import Bipartition, Graph


@dataclass(frozen=True, eq=False)
class SieveInstance:
    g: Graph
    part: Bipartition
    k: int
    l: int
    r: int

    def __post_init__(self):
        if self.k < 3:
            raise ValueError("the sieve needs k >= 3; smaller trees are decided directly")
        if not 2 <= self.l <= self.k - 1:
            raise ValueError(f"l must be in 2..k-1, got l={self.l}, k={self.k}")
        if not self.l <= self.r <= 2 * self.k - 1:
            raise ValueError(f"r must be in l..2k-1, got r={self.r}")
        if len(self.part) != self.g.n:
            raise ValueError("bipartition size does not match the graph")


@dataclass(frozen=True, eq=False)
class EvaluationPoint:
    """Values for x_{uv} (per edge), y_{q,t} (per vertex / edge and label) and z_v."""

    x: np.ndarray
    yv: np.ndarray
    ye: np.ndarray
    z: np.ndarray
    eta: int | None = None

    @classmethod
    def random(cls, g: Graph, r: int, rng: np.random.Generator) -> "EvaluationPoint":
        x = field.sample(rng, g.m)
        yv = field.sample(rng, g.n * r).reshape(g.n, r)
        ye = field.sample(rng, g.m * r).reshape(g.m, r)
        z = field.sample(rng, g.n)
        return cls(x, yv, ye, z)

    @property
    def r(self) -> int:
        return self.yv.shape[1]


class LabelSums:
    """Running sums sum_{t in X} y_{q,t} for every vertex and edge q.

    Labels are 1-based as in ``X``; ``toggle`` adds or removes one label in
    O(n + m).
    """

    def __init__(self, point: EvaluationPoint, subset: Sequence[int] = ()):
        self.point = point
        self.subset: set[int] = set()
        self.vertex = np.zeros(point.yv.shape[0], dtype=np.uint64)
        self.edge = np.zeros(point.ye.shape[0], dtype=np.uint64)
        for t in subset:
            self.toggle(t)

    def toggle(self, t: int) -> None:
        if not 1 <= t <= self.point.r:
            raise ValueError(f"label {t} outside 1..{self.point.r}")
        self.vertex ^= self.point.yv[:, t - 1]
        self.edge ^= self.point.ye[:, t - 1]
        self.subset ^= {t}


def label_sums(point: EvaluationPoint, subset: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    ls = LabelSums(point, subset)
    return ls.vertex, ls.edge


def gray_code_subsets(r: int) -> Iterator[tuple[int, int]]:
    """Yield (toggled label, bitmask) for the 2^r - 1 nonempty subsets of {1..r}."""
    for step in range(1, 1 << r):
        t = (step & -step).bit_length()
        yield t, step ^ (step >> 1)


class _Workspace:
    def __init__(self, g: Graph, k: int, l: int, r: int):
        shape = (k + 1, l + 1, r + 1)
        nslots = 2 * g.m
        self.S = np.zeros((nslots, *shape), dtype=np.uint64)
        self.F = np.zeros((nslots, *shape), dtype=np.uint64)
        self.pre = np.zeros((nslots + g.n, *shape), dtype=np.uint64)
        self.suf = np.zeros((nslots + g.n, *shape), dtype=np.uint64)
        self.lo = np.zeros((l + 1, r + 1), dtype=np.uint64)
        self.hi = np.zeros((l + 1, r + 1), dtype=np.uint64)

    @property
    def nbytes(self) -> int:
        return sum(a.nbytes for a in (self.S, self.F, self.pre, self.suf, self.lo, self.hi))


def _node_factors(g: Graph, eta: int | None) -> np.ndarray:
    if eta is None:
        return np.ones(g.n, dtype=np.uint64)
    w = g.weights or (1,) * g.n
    return np.array([field.power(eta, c) for c in w], dtype=np.uint64)


def _arrays(inst: SieveInstance, point: EvaluationPoint):
    g = inst.g
    if point.r < inst.r or point.x.shape[0] != g.m or point.z.shape[0] != g.n:
        raise ValueError("evaluation point does not match the instance")
    indptr, nbr, eid, rev = g.csr
    inv1 = inst.part.in_v1.astype(np.uint8)
    nw = _node_factors(g, point.eta)
    return indptr, nbr, eid, rev, inv1, np.ascontiguousarray(point.x, dtype=np.uint64), nw


def dp_evaluate(inst: SieveInstance, point: EvaluationPoint, subset: Sequence[int]) -> np.ndarray:
    """P_i^X at ``point`` for i = 0..r, labels restricted to ``subset``."""
    for t in subset:
        if not 1 <= t <= inst.r:
            raise ValueError(f"label {t} outside 1..{inst.r}")
    out = np.zeros(inst.r + 1, dtype=np.uint64)
    if inst.g.m == 0:
        return out
    indptr, nbr, eid, rev, inv1, x, nw = _arrays(inst, point)
    sv, se = label_sums(point, subset)
    ws = _Workspace(inst.g, inst.k, inst.l, inst.r)
    dp_kernel(indptr, nbr, eid, rev, inv1, x, sv, se,
              np.ascontiguousarray(point.z, dtype=np.uint64), nw, inst.k, inst.l, inst.r,
              ws.S, ws.F, ws.pre, ws.suf, ws.lo, ws.hi, out)
    return out


def evaluate_by_label(inst: SieveInstance, point: EvaluationPoint, per_subset: bool = False):
    """P_i = sum over X of [i] of P_i^X for i = 0..r; optionally the (2^r, r+1) table of P^X.

    One dynamic-programming run per nonempty X of [r] serves every i at once.
    """
    r = inst.r
    total = np.zeros(r + 1, dtype=np.uint64)
    table = np.zeros(((1 << r) if per_subset else 0, r + 1), dtype=np.uint64)
    if inst.g.m == 0:
        return (total, table) if per_subset else total
    indptr, nbr, eid, rev, inv1, x, nw = _arrays(inst, point)
    yv = np.ascontiguousarray(point.yv[:, :r], dtype=np.uint64)
    ye = np.ascontiguousarray(point.ye[:, :r], dtype=np.uint64)
    ws = _Workspace(inst.g, inst.k, inst.l, r)
    visited = all_subsets_kernel(indptr, nbr, eid, rev, inv1, x, yv, ye,
                                 np.ascontiguousarray(point.z, dtype=np.uint64), nw,
                                 inst.k, inst.l, r, r,
                                 ws.S, ws.F, ws.pre, ws.suf, ws.lo, ws.hi, total, table)
    assert visited == (1 << r) - 1
    return (total, table) if per_subset else total


def evaluate_P(inst: SieveInstance, point: EvaluationPoint) -> int:
    """Value of sum_{i=2..r} P_i at ``point``; zero whenever no (k, l)-tree exists."""
    per_i = evaluate_by_label(inst, point)
    acc = 0
    for i in range(2, inst.r + 1):
        acc ^= int(per_i[i])
    return acc


def workspace_bytes(g: Graph, k: int, l: int, r: int) -> int:
    return _Workspace(g, k, l, r).nbytes


# ---------------------------------------------------------------------------
# vertex-weighted variant


def interpolate(xs: Sequence[int], ys: Sequence[int]) -> list[int]:
    """Coefficients (low to high) of the polynomial through (xs, ys) over GF(2^64)."""
    n = len(xs)
    if len(set(xs)) != n:
        raise ValueError("interpolation nodes must be distinct")
    # Newton divided differences; subtraction is XOR
    coef = list(ys)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = field.mul(coef[i] ^ coef[i - 1], field.inv(xs[i] ^ xs[i - j]))
    poly = [0] * n
    for i in range(n - 1, -1, -1):
        # poly = poly * (X - xs[i]) + coef[i]
        shifted = [0] + poly[:-1]
        scaled = [field.mul(c, xs[i]) for c in poly]
        poly = [a ^ b for a, b in zip(shifted, scaled)]
        poly[0] ^= coef[i]
    return poly


def poly_eval(coeffs: Sequence[int], x: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = field.mul(acc, x) ^ c
    return acc


def weighted_degree(inst: SieveInstance) -> int:
    """Upper bound on the eta-degree: total weight of the k heaviest vertices."""
    w = inst.g.weights or (1,) * inst.g.n
    return sum(sorted(w, reverse=True)[: inst.k])


def evaluate_weighted(inst: SieveInstance, base_point: EvaluationPoint, weight_cap: int,
                      etas: Sequence[int] | None = None, degree: int | None = None) -> list[int]:
    """Coefficients R_0..R_D of the polynomial in eta.

    Every tree contributes eta^(its total weight), so D defaults to the
    weight of the k heaviest vertices.  R_w is nonzero (with high
    probability) iff some (k, l)-tree of total weight exactly w has at most
    r labellable elements.  Callers inspect indices >= ``weight_cap``.
    """
    if inst.g.weights is None:
        raise ValueError("evaluate_weighted needs vertex weights")
    if weight_cap < inst.k:
        raise ValueError("weight_cap must be at least k")
    if degree is None:
        degree = weighted_degree(inst)
    if etas is None:
        etas = list(range(1, degree + 2))
    if len(set(etas)) < degree + 1:
        raise ValueError(f"need {degree + 1} distinct interpolation nodes")
    etas = list(dict.fromkeys(etas))[: degree + 1]
    values = []
    for eta in etas:
        pt = EvaluationPoint(base_point.x, base_point.yv, base_point.ye, base_point.z, eta=eta)
        values.append(evaluate_P(inst, pt))
    return interpolate(etas, values)
