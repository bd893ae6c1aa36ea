"""Triangle contraction for subcubic graphs and the weighted k-path driver.

Contracting a triangle abc of a subcubic graph into one vertex of weight
w(a) + w(b) + w(c) keeps the maximum degree at most 3, and a k-path exists
in the original graph iff the contracted graph has a path of weight at
least k on at most k vertices.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field as dc_field

import numpy as np

from .detect import (
    DetectionPlan,
    Verdict,
    _clamp,
    color_schedule,
    sampler_budget,
    sampler_probability,
    schedule_params,
    trial_rng,
)
from .graph import Bipartition, Graph, greedy_coloring, sample_independent_set
from .sieve import EvaluationPoint, SieveInstance, evaluate_weighted

_STAGE_WEIGHTED = 20


@dataclass
class ContractionTrace:
    """Contractions in order; ids are those of the working graph.

    Original vertices keep ids 0..n-1, the vertex created by step j gets id
    n + j.  ``final_ids[i]`` is the working id of output vertex i; output
    vertices are ordered by the smallest original vertex they absorbed.
    """

    n: int
    steps: list[tuple[tuple[int, int, int], int]] = dc_field(default_factory=list)
    final_ids: list[int] = dc_field(default_factory=list)
    weights: list[int] = dc_field(default_factory=list)

    def to_json(self) -> str:
        # 1-based ids at the boundary
        return json.dumps({
            "n": self.n,
            "steps": [{"triangle": [a + 1, b + 1, c + 1], "new_vertex": t + 1} for (a, b, c), t in self.steps],
            "final_ids": [v + 1 for v in self.final_ids],
            "weights": self.weights,
        }, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ContractionTrace":
        d = json.loads(text)
        steps = [(tuple(v - 1 for v in s["triangle"]), s["new_vertex"] - 1) for s in d["steps"]]
        return cls(d["n"], steps, [v - 1 for v in d["final_ids"]], list(d["weights"]))


def _lowest_triangle(adj: dict[int, set[int]]) -> tuple[int, int, int] | None:
    for a in sorted(adj):
        for b in sorted(x for x in adj[a] if x > a):
            common = adj[a] & adj[b]
            cs = [c for c in common if c > b]
            if cs:
                return a, b, min(cs)
    return None


def find_triangle(g: Graph) -> tuple[int, int, int] | None:
    return _lowest_triangle({v: set(g.adj[v]) for v in range(g.n)})


def eliminate_triangles(g: Graph) -> tuple[Graph, ContractionTrace]:
    """Contract the lowest triangle until none is left."""
    if g.max_degree > 3:
        raise ValueError(f"maximum degree {g.max_degree} exceeds 3")
    adj = {v: set(g.adj[v]) for v in range(g.n)}
    w = dict(enumerate(g.weights or (1,) * g.n))
    rep = {v: v for v in range(g.n)}
    trace = ContractionTrace(g.n)
    nxt = g.n
    while True:
        tri = _lowest_triangle(adj)
        if tri is None:
            break
        t = nxt
        nxt += 1
        outside = set().union(*(adj[x] for x in tri)) - set(tri)
        for x in tri:
            for y in adj.pop(x):
                if y in adj:
                    adj[y].discard(x)
        adj[t] = outside
        for y in outside:
            adj[y].add(t)
        w[t] = sum(w.pop(x) for x in tri)
        rep[t] = min(rep.pop(x) for x in tri)
        trace.steps.append((tri, t))
    ids = sorted(adj, key=rep.__getitem__)
    new = {v: i for i, v in enumerate(ids)}
    edges = [(new[u], new[v]) for u in ids for v in adj[u] if u < v]
    weights = [w[v] for v in ids]
    trace.final_ids = ids
    trace.weights = weights
    return Graph.from_edges(len(ids), edges, weights), trace


def _bipartitions(h: Graph, k: int, plan: DetectionPlan):
    """(r, total trials, generator of bipartitions) for a (k, 2)-tree search in h."""
    l = 2
    if plan.strategy == "random":
        _, r, trials = schedule_params(k, l, plan.epsilon)
        total = trials * plan.confidence_boost

        def gen():
            for i in itertools.count():
                yield Bipartition.random(h.n, trial_rng(plan.seed, _STAGE_WEIGHTED, k * 1_000_003 + i))
    elif plan.strategy == "color":
        coloring = greedy_coloring(h)
        x, r = color_schedule(k, l, coloring.d)
        subsets = list(itertools.combinations(range(max(coloring.d, 2)), x))
        total = len(subsets) * plan.confidence_boost
        color = np.asarray(coloring.color)

        def gen():
            for i in itertools.count():
                yield Bipartition.from_v1(h.n, np.flatnonzero(np.isin(color, subsets[i % len(subsets)])).tolist())
    elif plan.strategy == "fractional":
        p = plan.sampler_p if plan.sampler_p is not None else sampler_probability(h)
        r = sampler_budget(k, l, p)
        total = (r + 1) * plan.confidence_boost

        def gen():
            for i in itertools.count():
                indep = sample_independent_set(h, trial_rng(plan.seed, _STAGE_WEIGHTED, k * 1_000_003 + i))
                yield Bipartition.from_v1(h.n, [v for v in range(h.n) if v not in indep])
    else:
        raise ValueError(f"strategy {plan.strategy!r} is not supported for weighted paths")
    if plan.r_override is not None:
        r = plan.r_override
    if plan.trials is not None:
        total = plan.trials
    return _clamp(r, k, l), total, gen()


def weighted_path_exists(h: Graph, k: int, min_weight: int, plan: DetectionPlan) -> Verdict:
    """Path on exactly k vertices with total weight at least ``min_weight`` (one-sided)."""
    w = list(h.weights or (1,) * h.n)
    detail = {"nodes": k, "min_weight": min_weight}
    if k > h.n or k < 1:
        return Verdict(False, 0, None, 0, detail)
    if k == 1:
        return Verdict(max(w, default=0) >= min_weight, 0, None, 0, detail)
    if k == 2:
        return Verdict(any(w[u] + w[v] >= min_weight for u, v in h.edges), 0, None, 0, detail)
    # the eta-degree is at most the k heaviest weights combined
    top = sum(sorted(w, reverse=True)[:k])
    if top < min_weight:
        return Verdict(False, 0, None, 0, detail)
    etas = list(range(1, top + 2))
    r, total, parts = _bipartitions(h, k, plan)
    for i in range(total):
        part = next(parts)
        rng = trial_rng(plan.seed, _STAGE_WEIGHTED + 1, k * 1_000_003 + i)
        point = EvaluationPoint.random(h, r, rng)
        coeffs = evaluate_weighted(SieveInstance(h, part, k, 2, r), point, min_weight, etas=etas, degree=top)
        if any(coeffs[min_weight:]):
            hit = [j for j in range(min_weight, len(coeffs)) if coeffs[j]]
            return Verdict(True, i + 1, i, r, {**detail, "weights_hit": hit})
    return Verdict(False, total, None, r, detail)


def kpath_subcubic(g: Graph, k: int, plan: DetectionPlan) -> Verdict:
    """k-path in a subcubic graph via triangle contraction and weighted sieving.

    Tries every node count k' <= k in the contracted graph, since a heavy
    path may need fewer vertices after contraction.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    h, trace = eliminate_triangles(g)
    detail = {"strategy": plan.strategy, "contractions": len(trace.steps), "contracted_n": h.n}
    trials = 0
    r_used = 0
    for kk in range(1, min(k, h.n) + 1):
        v = weighted_path_exists(h, kk, k, plan)
        trials += v.trials_run
        r_used = max(r_used, v.r_used)
        if v.answer:
            return Verdict(True, trials, trials - 1 if trials else None, r_used,
                           {**detail, "nodes": kk, **v.strategy_detail})
    return Verdict(False, trials, None, r_used, detail)
