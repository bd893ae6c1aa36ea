"""Benchmark sweeps behind ``treesieve bench``.

Each mode returns a list of flat row dicts (CSV-ready) and can render a
figure with matplotlib.
"""

from __future__ import annotations

import math
import time
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import detect as D
from .graph import Bipartition, Graph, greedy_coloring, read_graph, vector_coloring_from_coloring
from .sieve import EvaluationPoint, SieveInstance, evaluate_P

GRAPH_SUFFIXES = (".txt", ".edges", ".el", ".col", ".dimacs", ".graph")


def load_corpus(directory: str | Path) -> list[tuple[str, Graph]]:
    d = Path(directory)
    if not d.is_dir():
        raise FileNotFoundError(f"corpus directory {d} does not exist")
    files = sorted(p for p in d.iterdir() if p.is_file() and p.suffix in GRAPH_SUFFIXES)
    return [(p.stem, read_graph(p)) for p in files]


def random_subtree(g: Graph, k: int, rng: np.random.Generator) -> tuple[list[int], list[tuple[int, int]]] | None:
    """A k-vertex subtree grown from a random vertex by random frontier edges."""
    order = rng.permutation(g.n)
    for start in order[: min(g.n, 20)]:
        verts = [int(start)]
        inside = {int(start)}
        edges = []
        while len(verts) < k:
            frontier = [(u, v) for u in verts for v in g.adj[u] if v not in inside]
            if not frontier:
                break
            u, v = frontier[int(rng.integers(len(frontier)))]
            verts.append(v)
            inside.add(v)
            edges.append((u, v))
        if len(verts) == k:
            return verts, edges
    return None


def la_size_samples(verts: Sequence[int], edges: Sequence[tuple[int, int]], sides: np.ndarray) -> np.ndarray:
    """|la(T)| for each row of ``sides`` (rows: bipartitions as booleans, True = side 1)."""
    deg = {v: 0 for v in verts}
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    leaves = [v for v in verts if deg[v] == 1] if len(verts) > 1 else []
    internal = [v for v in verts if v not in set(leaves)]
    out = np.full(sides.shape[0], len(leaves), dtype=np.int64)
    if internal:
        out += sides[:, internal].sum(axis=1)
    if edges:
        eu = np.array([u for u, _ in edges])
        ev = np.array([v for _, v in edges])
        out += (~sides[:, eu] & ~sides[:, ev]).sum(axis=1)
    return out


def _strategy_plan(g: Graph, k: int, l: int, strategy: str, seed: int, boost: int) -> D.DetectionPlan:
    kw = {}
    if strategy in ("color", "vector"):
        pc = greedy_coloring(g)
        kw["coloring"] = pc
        if strategy == "vector":
            kw["vectors"] = vector_coloring_from_coloring(pc)
    return D.DetectionPlan(k, l, strategy=strategy, seed=seed, confidence_boost=boost, **kw)


def sweep(corpus: Iterable[tuple[str, Graph]], ks: Sequence[int], l: int, strategies: Sequence[str],
          seed: int = 0, boost: int = 1, runs: int = 1) -> list[dict]:
    """``runs`` detector runs (seeds seed, seed+1, ...) per (graph, k, strategy)."""
    rows = []
    for name, g in corpus:
        for k in ks:
            if k > g.n or not 2 <= l <= max(2, k - 1):
                continue
            for strategy in strategies:
                yes = trials = 0
                r_used = 0
                t0 = time.perf_counter()
                for i in range(runs):
                    v = D.detect_tree(g, _strategy_plan(g, k, l, strategy, seed + i, boost))
                    yes += v.answer
                    trials += v.trials_run
                    r_used = max(r_used, v.r_used)
                dt = time.perf_counter() - t0
                rows.append({
                    "graph": name, "n": g.n, "m": g.m, "max_degree": g.max_degree,
                    "k": k, "l": l, "strategy": strategy, "r": r_used,
                    "budget_ratio": round(r_used / k, 6), "runs": runs,
                    "yes_rate": round(yes / runs, 6), "mean_trials": round(trials / runs, 3),
                    "seconds": round(dt / runs, 6),
                    "seconds_per_trial": round(dt / max(trials, 1), 6),
                })
    return rows


def la_histogram(corpus: Iterable[tuple[str, Graph]], ks: Sequence[int], samples: int = 10_000,
                 seed: int = 0) -> list[dict]:
    """Empirical |la| tail of a random witness tree against C(k-1, 2t) / 2^(k+1)."""
    rows = []
    rng = np.random.default_rng(seed)
    for name, g in corpus:
        for k in ks:
            tree = random_subtree(g, k, rng) if k >= 3 else None
            if tree is None:
                continue
            verts, edges = tree
            sides = rng.random((samples, g.n)) < 0.5
            sizes = la_size_samples(verts, edges, sides)
            l = sum(1 for v in verts if sum(1 for e in edges if v in e) == 1)
            for t in range(0, (k - 1) // 2 + 1):
                threshold = k + l / 2 - t
                rows.append({
                    "graph": name, "k": k, "l": l, "t": t, "threshold": threshold,
                    "empirical": float(np.mean(sizes <= threshold)),
                    "bound": math.comb(k - 1, 2 * t) / 2 ** (k + 1),
                    "mean_la": float(sizes.mean()), "expected_la": 3 * k / 4 + l / 2 - 0.25,
                    "samples": samples,
                })
    return rows


def scaling(g: Graph, k: int, l: int, rs: Sequence[int], repeats: int = 3, seed: int = 0) -> list[dict]:
    """Time of one evaluation of the sieve polynomial for each label budget r."""
    rows = []
    rng = np.random.default_rng(seed)
    part = Bipartition.random(g.n, rng)
    for r in rs:
        inst = SieveInstance(g, part, k, l, r)
        point = EvaluationPoint.random(g, r, rng)
        evaluate_P(inst, point)
        best = math.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            evaluate_P(inst, point)
            best = min(best, time.perf_counter() - t0)
        rows.append({"k": k, "l": l, "r": r, "seconds": round(best, 6)})
    return rows


# ---------------------------------------------------------------------------
# figures


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def plot_sweep(rows: Sequence[dict], path: str | Path) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    keys = sorted({(r["graph"], r["strategy"]) for r in rows})
    for graph, strategy in keys:
        pts = sorted((r["k"], r["seconds_per_trial"]) for r in rows if r["graph"] == graph and r["strategy"] == strategy)
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=f"{graph} / {strategy}")
    ax.set_yscale("log")
    ax.set_xlabel("k")
    ax.set_ylabel("seconds per trial")
    if keys:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_la_histogram(rows: Sequence[dict], path: str | Path) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for graph, k in sorted({(r["graph"], r["k"]) for r in rows}):
        sel = sorted((r for r in rows if r["graph"] == graph and r["k"] == k), key=lambda r: r["t"])
        ax.plot([r["t"] for r in sel], [r["empirical"] for r in sel], marker="o", label=f"{graph} k={k} empirical")
        ax.plot([r["t"] for r in sel], [r["bound"] for r in sel], linestyle="--", label=f"{graph} k={k} bound")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("Pr[|la| <= k + l/2 - t]")
    ax.legend(fontsize=6)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_scaling(rows: Sequence[dict], path: str | Path) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    rs = [r["r"] for r in rows]
    ts = [r["seconds"] for r in rows]
    ax.plot(rs, ts, marker="o", label="measured")
    if len(rows) >= 2:
        slope = fit_log2_slope(rs, ts)
        ax.set_title(f"fitted growth per unit r: {2 ** slope:.2f}x")
    ax.set_yscale("log", base=2)
    ax.set_xlabel("r")
    ax.set_ylabel("seconds per evaluation")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def fit_log2_slope(rs: Sequence[int], seconds: Sequence[float]) -> float:
    return float(np.polyfit(np.asarray(rs, dtype=float), np.log2(np.asarray(seconds, dtype=float)), 1)[0])
