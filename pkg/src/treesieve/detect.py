"""Monte-Carlo decision procedures built on the sieve.

Every detector has one-sided error: a YES comes from a nonzero polynomial
evaluation, which is impossible without a (k, l)-tree, while a NO may be
wrong with small probability.  Each detector is a sequence of trials; a
trial picks a bipartition and a label budget r and evaluates the sieve
polynomial once at a fresh random point.
"""

from __future__ import annotations

import itertools
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np

from .graph import (
    Bipartition,
    FractionalColoring,
    Graph,
    ProperColoring,
    VectorColoring,
    hyperplane_bipartition,
    induced_subgraph,
    matching_size,
    sample_independent_set,
)
from .sieve import EvaluationPoint, SieveInstance, evaluate_P

log = logging.getLogger(__name__)

DEFAULT_EPSILON = 0.042894
DEFAULT_ALPHA = 0.8627
STRATEGIES = ("random", "color", "fractional", "vector", "bipartition")
# inclusion probability of the random-order greedy independent set in
# subcubic graphs of girth >= 7, 11, 15
SUBCUBIC_GIRTH_P = ((15, 0.3749), (11, 0.3742), (7, 0.3589))
MAX_COLOR_SUBSETS = 10**4

# substream stage ids
_STAGE_TRIAL = 0
_STAGE_KIST_SPLIT = 1
_STAGE_KIST_MATCH = 2


@dataclass
class DetectionPlan:
    k: int
    l: int
    strategy: str = "random"
    epsilon: float = DEFAULT_EPSILON
    trials: int | None = None
    r_override: int | None = None
    seed: int = 0
    confidence_boost: int = 1
    coloring: ProperColoring | None = None
    fractional: FractionalColoring | None = None
    fractional_t: int = 1
    sampler_p: float | None = None
    vectors: VectorColoring | None = None
    partition: Bipartition | None = None
    threads: int = 1
    keep_log: bool = False

    def __post_init__(self):
        if self.strategy == "fixed-bipartition":
            self.strategy = "bipartition"
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not 2 <= self.l <= max(2, self.k - 1):
            raise ValueError(f"l must be in 2..max(2, k-1), got l={self.l}, k={self.k}")
        if not 0 <= self.epsilon < 0.25:
            raise ValueError("epsilon must be in [0, 1/4)")
        if self.trials is not None and self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.confidence_boost < 1:
            raise ValueError("confidence_boost must be at least 1")
        if self.r_override is not None and self.r_override < 1:
            raise ValueError("r must be positive")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")

    def with_shape(self, k: int, l: int, **changes) -> "DetectionPlan":
        kw = dict(self.__dict__)
        kw.update(k=k, l=l, **changes)
        return DetectionPlan(**kw)


@dataclass
class Verdict:
    answer: bool
    trials_run: int
    first_hit_trial: int | None
    r_used: int
    strategy_detail: dict = dc_field(default_factory=dict)
    log: list[dict] = dc_field(default_factory=list)

    @property
    def label(self) -> str:
        return "YES" if self.answer else "NO"

    def to_dict(self) -> dict:
        return {
            "answer": self.label,
            "trials_run": self.trials_run,
            "first_hit_trial": self.first_hit_trial,
            "r_used": self.r_used,
            "strategy_detail": self.strategy_detail,
            "log": self.log,
        }


def trial_rng(seed: int, stage: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stage, index)))


# ---------------------------------------------------------------------------
# schedules


def schedule_params(k: int, l: int, epsilon: float = DEFAULT_EPSILON) -> tuple[int, int, int]:
    """(t, r, trials) for the uniform random bipartition.

    t = floor((1/4 + eps) k), r = k - t + ceil(l/2),
    trials = ceil(2^(k+1) / C(k-1, 2t)), all in exact arithmetic.
    """
    if not 0 <= epsilon < 0.25:
        raise ValueError("epsilon must be in [0, 1/4)")
    eps = Fraction(str(epsilon))
    t = math.floor((Fraction(1, 4) + eps) * k)
    t = max(0, min(t, (k - 1) // 2))
    r = k - t + -(-l // 2)
    c = math.comb(k - 1, 2 * t) if k >= 1 else 1
    trials = -(-(2 ** (k + 1)) // c)
    return t, r, trials


def max_labels(k: int, l: int) -> int:
    """Upper bound on |la(T)| for any (k, l)-tree under any bipartition."""
    return k + l - 1


def _clamp(r: int, k: int, l: int) -> int:
    return max(l, min(r, max_labels(k, l)))


def round_half_away(x: Fraction) -> int:
    return math.floor(x + Fraction(1, 2)) if x >= 0 else -math.floor(-x + Fraction(1, 2))


def color_bound(k: int, l: int, d: int, x: int) -> Fraction:
    """(1 - x(d-x)/(d(d-1))) k + (1 - x/d) l."""
    return (1 - Fraction(x * (d - x), d * (d - 1))) * k + (1 - Fraction(x, d)) * l


def color_schedule(k: int, l: int, d: int) -> tuple[int, int]:
    """(x, r): number of classes placed on side 1 and the label budget."""
    d = max(d, 2)
    target = Fraction(d + Fraction(l, k) * (d - 1), 2)
    rounded = round_half_away(target)
    candidates = {math.floor(target), math.ceil(target), rounded}
    candidates = [x for x in candidates if 0 <= x <= d]
    x = min(candidates, key=lambda c: (color_bound(k, l, d, c), c != rounded, c))
    return x, math.ceil(color_bound(k, l, d, x))


def fractional_bound(k: int, l: int, a: int, b: int, t: int = 1) -> Fraction:
    ca = math.comb(a, t)
    return (1 - Fraction(math.comb(a - b, t) - math.comb(a - 2 * b, t), ca)) * k + \
        (1 - Fraction(math.comb(a - b, t), ca)) * l


def sampler_probability(g: Graph) -> float:
    """Guaranteed per-vertex inclusion probability of the greedy independent-set sampler."""
    delta = g.max_degree
    if delta <= 3:
        girth = g.girth()
        for min_girth, p in SUBCUBIC_GIRTH_P:
            if girth >= min_girth:
                return p
    return 1.0 / (delta + 1)


def sampler_budget(k: int, l: int, p: float) -> int:
    pf = Fraction(str(p))
    return math.ceil((1 - pf) * k + pf * l) + 1


def vector_budget(k: int, l: int, value: float) -> int:
    c = max(-1.0, min(1.0, -1.0 / (value - 1.0)))
    return math.ceil((k + l) / 2 + (1 - math.acos(c) / math.pi) * (k - 1) / 2)


# ---------------------------------------------------------------------------
# trial runner

Trial = tuple[int, Bipartition, dict]


def _evaluate_trial(g: Graph, k: int, l: int, seed: int, index: int, r: int, part: Bipartition) -> bool:
    rng = trial_rng(seed, _STAGE_TRIAL, index)
    point = EvaluationPoint.random(g, r, rng)
    return evaluate_P(SieveInstance(g, part, k, l, r), point) != 0


def run_trials(g: Graph, plan: DetectionPlan, trials: Iterator[Trial], total: int, detail: dict) -> Verdict:
    """Evaluate trials in order, stopping at the first nonzero evaluation.

    With several threads, trials run in chunks; the reported hit is the
    lowest-indexed one, so the verdict does not depend on the thread count.
    """
    k, l = plan.k, plan.l
    records: list[dict] = []
    r_used = 0
    index = 0
    pool = ThreadPoolExecutor(plan.threads) if plan.threads > 1 else None
    try:
        while index < total:
            chunk = list(itertools.islice(trials, min(plan.threads, total - index)))
            if not chunk:
                break
            if pool is None:
                hits = [_evaluate_trial(g, k, l, plan.seed, index, *chunk[0][:2])]
            else:
                futures = [pool.submit(_evaluate_trial, g, k, l, plan.seed, index + j, r, part)
                           for j, (r, part, _) in enumerate(chunk)]
                hits = [f.result() for f in futures]
            for j, ((r, part, info), hit) in enumerate(zip(chunk, hits)):
                r_used = max(r_used, r)
                if plan.keep_log:
                    records.append({"trial": index + j, "r": r, "v1": int(part.in_v1.sum()),
                                    "nonzero": bool(hit), **info})
                if hit:
                    return Verdict(True, index + j + 1, index + j, r_used, detail, records)
            index += len(chunk)
    finally:
        if pool is not None:
            pool.shutdown()
    return Verdict(False, index, None, r_used, detail, records)


def _trivial(g: Graph, k: int, l: int) -> bool | None:
    """Decide shapes the sieve does not handle (k <= 2) or cannot contain."""
    if k > g.n:
        return False
    if k == 1:
        return l == 0 and g.n >= 1
    if k == 2:
        return l == 2 and g.m >= 1
    if g.m == 0:
        return False
    return None


def _trivial_verdict(answer: bool, strategy: str) -> Verdict:
    return Verdict(answer, 0, None, 0, {"strategy": strategy, "decided_directly": True})


# ---------------------------------------------------------------------------
# detectors


def detect_tree_random(g: Graph, plan: DetectionPlan) -> Verdict:
    direct = _trivial(g, plan.k, plan.l)
    if direct is not None:
        return _trivial_verdict(direct, "random")
    k, l = plan.k, plan.l
    t, r, trials = schedule_params(k, l, plan.epsilon)
    if plan.r_override is not None:
        r = plan.r_override
    r = _clamp(r, k, l)
    total = plan.trials or trials * plan.confidence_boost

    def gen():
        for i in itertools.count():
            rng = trial_rng(plan.seed, _STAGE_TRIAL + 100, i)
            yield r, Bipartition.random(g.n, rng), {}

    detail = {"strategy": "random", "t": t, "scheduled_trials": trials, "epsilon": plan.epsilon}
    return run_trials(g, plan, gen(), total, detail)


def detect_tree_fixed(g: Graph, plan: DetectionPlan, part: Bipartition | None = None) -> Verdict:
    """Sieve under one given bipartition; the default budget covers every tree."""
    part = part if part is not None else plan.partition
    if part is None:
        raise ValueError("the bipartition strategy needs a partition")
    if len(part) != g.n:
        raise ValueError("partition size does not match the graph")
    direct = _trivial(g, plan.k, plan.l)
    if direct is not None:
        return _trivial_verdict(direct, "bipartition")
    k, l = plan.k, plan.l
    r = _clamp(plan.r_override if plan.r_override is not None else max_labels(k, l), k, l)
    total = plan.trials or plan.confidence_boost
    gen = ((r, part, {}) for _ in itertools.count())
    return run_trials(g, plan, gen, total, {"strategy": "bipartition", "v1_size": int(part.in_v1.sum())})


def detect_tree_colored(g: Graph, coloring: ProperColoring | None, plan: DetectionPlan) -> Verdict:
    coloring = coloring if coloring is not None else plan.coloring
    if coloring is None:
        raise ValueError("the color strategy needs a proper coloring")
    coloring.validate(g)
    direct = _trivial(g, plan.k, plan.l)
    if direct is not None:
        return _trivial_verdict(direct, "color")
    k, l, d = plan.k, plan.l, coloring.d
    x, r = color_schedule(k, l, d)
    if plan.r_override is not None:
        r = plan.r_override
    r = _clamp(r, k, l)
    ncomb = math.comb(max(d, 2), x)
    sampled = ncomb > MAX_COLOR_SUBSETS
    if sampled:
        log.warning("C(%d, %d) = %d color subsets; sampling %d uniformly", d, x, ncomb, MAX_COLOR_SUBSETS)
        srng = trial_rng(plan.seed, _STAGE_TRIAL + 200, 0)
        subsets = [tuple(sorted(srng.choice(d, size=x, replace=False).tolist())) for _ in range(MAX_COLOR_SUBSETS)]
    else:
        subsets = list(itertools.combinations(range(max(d, 2)), x))
    total = plan.trials or len(subsets) * plan.confidence_boost
    color = np.asarray(coloring.color)

    def gen():
        for i in itertools.count():
            chosen = subsets[i % len(subsets)]
            v1 = np.isin(color, chosen)
            yield r, Bipartition.from_v1(g.n, np.flatnonzero(v1).tolist()), {"colors": [c + 1 for c in chosen]}

    detail = {"strategy": "color", "d": d, "x": x, "subsets": len(subsets), "sampled": sampled,
              "bound": str(color_bound(k, l, max(d, 2), x))}
    return run_trials(g, plan, gen(), total, detail)


def detect_tree_fractional(g: Graph, fc: FractionalColoring | None, plan: DetectionPlan) -> Verdict:
    """File mode when a fractional coloring is given, otherwise the independent-set sampler."""
    fc = fc if fc is not None else plan.fractional
    direct = _trivial(g, plan.k, plan.l)
    k, l = plan.k, plan.l
    if fc is not None:
        fc.validate(g)
        if direct is not None:
            return _trivial_verdict(direct, "fractional")
        t = plan.fractional_t
        if not 1 <= t <= fc.b:
            raise ValueError(f"fractional_t must be in 1..{fc.b}")
        r = math.ceil(fractional_bound(k, l, fc.a, fc.b, t))
        if plan.r_override is not None:
            r = plan.r_override
        r = _clamp(r, k, l)
        subsets = list(itertools.combinations(range(fc.a), t))
        total = plan.trials or len(subsets) * plan.confidence_boost
        sets = [frozenset(cs) for cs in fc.colorsets]

        def gen():
            for i in itertools.count():
                s = set(subsets[i % len(subsets)])
                v1 = [v for v in range(g.n) if not (sets[v] & s)]
                yield r, Bipartition.from_v1(g.n, v1), {"colors": [c + 1 for c in sorted(s)]}

        detail = {"strategy": "fractional", "mode": "file", "a": fc.a, "b": fc.b, "t": t}
        return run_trials(g, plan, gen(), total, detail)

    if direct is not None:
        return _trivial_verdict(direct, "fractional")
    p = plan.sampler_p if plan.sampler_p is not None else sampler_probability(g)
    if not 0 < p < 1:
        raise ValueError("sampler probability must be in (0, 1)")
    r = sampler_budget(k, l, p)
    if plan.r_override is not None:
        r = plan.r_override
    r = _clamp(r, k, l)
    # Markov: |la| <= r with probability >= 2 / (r + 1) per sample
    total = plan.trials or (r + 1) * plan.confidence_boost

    def gen():
        for i in itertools.count():
            rng = trial_rng(plan.seed, _STAGE_TRIAL + 300, i)
            indep = sample_independent_set(g, rng)
            v1 = [v for v in range(g.n) if v not in indep]
            yield r, Bipartition.from_v1(g.n, v1), {"independent": len(indep)}

    detail = {"strategy": "fractional", "mode": "sampler", "p": p}
    return run_trials(g, plan, gen(), total, detail)


def detect_tree_vector(g: Graph, vc: VectorColoring | None, plan: DetectionPlan) -> Verdict:
    vc = vc if vc is not None else plan.vectors
    if vc is None:
        raise ValueError("the vector strategy needs a vector coloring")
    vc.validate(g)
    direct = _trivial(g, plan.k, plan.l)
    if direct is not None:
        return _trivial_verdict(direct, "vector")
    k, l = plan.k, plan.l
    budget = vector_budget(k, l, vc.value)
    r = _clamp(plan.r_override if plan.r_override is not None else budget, k, l)
    total = plan.trials or (budget + 1) * plan.confidence_boost

    def gen():
        for i in itertools.count():
            rng = trial_rng(plan.seed, _STAGE_TRIAL + 400, i)
            yield r, hyperplane_bipartition(vc, rng), {}

    detail = {"strategy": "vector", "value": vc.value, "budget": budget}
    return run_trials(g, plan, gen(), total, detail)


def detect_tree(g: Graph, plan: DetectionPlan) -> Verdict:
    """Dispatch on ``plan.strategy``."""
    if plan.strategy == "random":
        return detect_tree_random(g, plan)
    if plan.strategy == "color":
        return detect_tree_colored(g, None, plan)
    if plan.strategy == "fractional":
        return detect_tree_fractional(g, None, plan)
    if plan.strategy == "vector":
        return detect_tree_vector(g, None, plan)
    return detect_tree_fixed(g, plan)


def kpath(g: Graph, k: int, plan: DetectionPlan) -> Verdict:
    """Simple path on k vertices, as a (k, 2)-tree."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if k == 1:
        return _trivial_verdict(g.n >= 1, plan.strategy)
    return detect_tree(g, plan.with_shape(k, 2))


def hamiltonicity(g: Graph, plan: DetectionPlan) -> Verdict:
    if g.n == 0:
        return _trivial_verdict(False, plan.strategy)
    return kpath(g, g.n, plan)


# ---------------------------------------------------------------------------
# k internal spanning tree


def leaf_cap(k: int, delta: int) -> int:
    """Leaves needed in a minimal witness with k internal vertices when the max degree is delta."""
    if delta < 2:
        return k
    return min(k, math.floor(Fraction(k) - Fraction(k - 2, delta - 1)))


def trim_count(k: int, l: int) -> int:
    """Matching edges split off a minimal (k + l, l)-tree by repeated leaf-parent removal."""
    return max(0, 2 * l - k - 2)


def split_schedule(k: int, l: int) -> tuple[int, Fraction, int]:
    """(s, p, repetitions) for separating an s-edge matching from the trimmed tree.

    Each vertex goes to the matching side with probability p = 2s / (k + l);
    a fixed witness is separated with probability p^(2s) (1 - p)^(k + l - 2s),
    and the repetition count is the ceiling of its reciprocal.
    """
    s = trim_count(k, l)
    if s == 0:
        return 0, Fraction(0), 1
    p = Fraction(2 * s, k + l)
    q = p ** (2 * s) * (1 - p) ** (k + l - 2 * s)
    return s, p, math.ceil(1 / q)


def kist(g: Graph, k: int, plan: DetectionPlan, alpha: float = DEFAULT_ALPHA) -> Verdict:
    """Spanning tree with at least k internal vertices.

    A witness is a subtree with exactly k internal vertices and l <= k leaves.
    Strategy A searches (k + l, l)-trees directly for small l; strategy B, for
    large l, splits the vertices at random and looks for an s-edge matching on
    one side and the trimmed (k + l - 2s, l - s)-tree on the other.
    """
    detail: dict = {"strategy": "kist", "alpha": alpha}
    if k < 0:
        raise ValueError("k must be non-negative")
    n = g.n
    if n == 0:
        return Verdict(False, 0, None, 0, detail)
    connected = g.is_connected()
    if not connected:
        detail["reason"] = "disconnected"
        return Verdict(False, 0, None, 0, detail)
    if k == 0:
        return Verdict(True, 0, None, 0, {**detail, "reason": "connected"})
    if k > n - 2:
        detail["reason"] = "k > n - 2"
        return Verdict(False, 0, None, 0, detail)
    if k == 1:
        return Verdict(True, 0, None, 0, {**detail, "reason": "connected, n >= 3"})

    cap = min(leaf_cap(k, g.max_degree), n - k)
    split = math.floor(alpha * k)
    trials_run = 0
    r_used = 0
    sub_base = plan.with_shape(3, 2, strategy="random", trials=None, r_override=None)

    # strategy A
    for l in range(2, min(split, cap) + 1):
        sub = sub_base.with_shape(k + l, l, seed=_subseed(plan.seed, 0, l))
        v = detect_tree_random(g, sub)
        trials_run += v.trials_run
        r_used = max(r_used, v.r_used)
        if v.answer:
            return Verdict(True, trials_run, trials_run - 1, r_used,
                           {**detail, "found_by": "A", "l": l, "cap": cap})

    # strategy B
    for l in range(max(split + 1, 2), cap + 1):
        s, p, reps = split_schedule(k, l)
        reps *= plan.confidence_boost
        tk, tl = k + l - 2 * s, l - s
        for rep in range(reps):
            rng = trial_rng(plan.seed, _STAGE_KIST_SPLIT, l * 1_000_003 + rep)
            on_m = rng.random(n) < float(p) if s else np.zeros(n, dtype=bool)
            vm = np.flatnonzero(on_m).tolist()
            vt = np.flatnonzero(~on_m).tolist()
            if len(vt) < tk:
                continue
            if s:
                gm, _ = induced_subgraph(g, vm)
                mrng = trial_rng(plan.seed, _STAGE_KIST_MATCH, l * 1_000_003 + rep)
                if matching_size(gm, mrng) < s:
                    continue
            gt, _ = induced_subgraph(g, vt)
            sub = sub_base.with_shape(tk, tl, seed=_subseed(plan.seed, l, rep + 1))
            v = detect_tree_random(gt, sub)
            trials_run += v.trials_run
            r_used = max(r_used, v.r_used)
            if v.answer:
                return Verdict(True, trials_run, trials_run - 1, r_used,
                               {**detail, "found_by": "B", "l": l, "s": s, "repetition": rep, "cap": cap})
    return Verdict(False, trials_run, None, r_used, {**detail, "cap": cap})


def _subseed(seed: int, a: int, b: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(7, a, b)).generate_state(1, np.uint64)[0])


def default_threads() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)
