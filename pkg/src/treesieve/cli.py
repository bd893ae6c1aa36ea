"""Command-line entry point: ``treesieve {detect,kpath,ham,kist,bench,preprocess}``.

Exit codes: 0 = YES, 1 = NO, 2 = usage or input error.  ``bench`` and
``preprocess`` exit 0 on success.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__
from . import bench as B
from . import detect as D
from .graph import (
    GraphFormatError,
    parse_coloring,
    parse_fractional,
    parse_partition,
    parse_vectors,
    read_graph,
    write_graph,
)
from .preprocess import eliminate_triangles, kpath_subcubic

SCHEMA = "treesieve.report/1"
EXIT_YES, EXIT_NO, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", required=True, help="edge-list or DIMACS graph file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--boost", type=int, default=1, help="confidence boost multiplying the trial count")
    p.add_argument("--epsilon", type=float, default=D.DEFAULT_EPSILON)
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: available CPUs)")
    p.add_argument("--json", action="store_true", help="print a JSON report")
    p.add_argument("--log", action="store_true", help="include the per-trial log in the JSON report")


def _add_strategy(p: argparse.ArgumentParser) -> None:
    p.add_argument("--strategy", choices=D.STRATEGIES, default="random")
    p.add_argument("--coloring", help="proper coloring file (color strategy)")
    p.add_argument("--fractional", help="fractional coloring file; sampler mode when omitted")
    p.add_argument("--vectors", help="vector coloring file (vector strategy)")
    p.add_argument("--partition", help="bipartition file (bipartition strategy)")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--r", type=int, default=None, help="label budget override")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treesieve", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"treesieve {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="(k, l)-tree detection")
    _add_common(p)
    _add_strategy(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, required=True)

    p = sub.add_parser("kpath", help="simple path on k vertices")
    _add_common(p)
    _add_strategy(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--subcubic", action="store_true",
                   help="contract triangles first and run the weighted search (max degree 3)")

    p = sub.add_parser("ham", help="Hamiltonian path")
    _add_common(p)
    _add_strategy(p)

    p = sub.add_parser("kist", help="spanning tree with at least k internal vertices")
    _add_common(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alpha", type=float, default=D.DEFAULT_ALPHA)

    p = sub.add_parser("bench", help="benchmark sweeps with CSV/JSON rows and PNG figures")
    p.add_argument("--corpus", required=True, help="directory of graph files")
    p.add_argument("--mode", choices=("sweep", "la-hist", "scaling"), default="sweep")
    p.add_argument("--k", default="4,5,6", help="comma list or a-b range of k values")
    p.add_argument("--l", type=int, default=2)
    p.add_argument("--r", default=None, help="scaling mode: comma list or a-b range of budgets")
    p.add_argument("--strategies", default="random,color")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--boost", type=int, default=1)
    p.add_argument("--runs", type=int, default=1, help="sweep mode: detector runs per row (seeds seed..seed+runs-1)")
    p.add_argument("--out", default=None, help="directory for the CSV file and figures")
    p.add_argument("--json", action="store_true", help="print rows as JSON instead of CSV")

    p = sub.add_parser("preprocess", help="contract triangles of a subcubic graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True, help="weighted output graph file")
    p.add_argument("--trace", default=None, help="JSON contraction trace (default: OUT.trace.json)")
    return parser


# ---------------------------------------------------------------------------


def _read(path: str | None, what: str) -> str:
    if path is None:
        raise UsageError(f"--{what} is required for this strategy")
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {what} file: {exc}") from exc


def _load_graph(path: str):
    try:
        return read_graph(path)
    except OSError as exc:
        raise UsageError(f"cannot read graph: {exc}") from exc


def _plan(args, g, k: int, l: int) -> D.DetectionPlan:
    kw: dict = {}
    strategy = getattr(args, "strategy", "random")
    if strategy == "color":
        kw["coloring"] = parse_coloring(_read(args.coloring, "coloring"), g)
    elif strategy == "fractional" and args.fractional:
        kw["fractional"] = parse_fractional(_read(args.fractional, "fractional"), g)
    elif strategy == "vector":
        kw["vectors"] = parse_vectors(_read(args.vectors, "vectors"), g)
    elif strategy == "bipartition":
        kw["partition"] = parse_partition(_read(args.partition, "partition"), g)
    threads = args.threads if args.threads is not None else D.default_threads()
    return D.DetectionPlan(
        k, l, strategy=strategy, epsilon=args.epsilon, trials=getattr(args, "trials", None),
        r_override=getattr(args, "r", None), seed=args.seed, confidence_boost=args.boost,
        threads=threads, keep_log=args.log, **kw)


def _report(args, argv, g, plan_fields: dict, verdict: D.Verdict, timing: dict) -> dict:
    return {
        "schema": SCHEMA,
        "version": __version__,
        "command": argv,
        "graph": {"n": g.n, "m": g.m, "max_degree": g.max_degree},
        "plan": plan_fields,
        "verdict": verdict.to_dict(),
        "timing": timing,
    }


def _plan_fields(plan: D.DetectionPlan, k: int, l: int) -> dict:
    t, r, trials = D.schedule_params(k, l, plan.epsilon) if k >= 1 else (0, 0, 0)
    return {
        "k": k, "l": l, "strategy": plan.strategy, "epsilon": plan.epsilon, "t": t,
        "scheduled_r": r, "scheduled_trials": trials, "trials_override": plan.trials,
        "r_override": plan.r_override, "boost": plan.confidence_boost, "seed": plan.seed,
    }


def _emit(args, report: dict, verdict: D.Verdict) -> int:
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        v = report["verdict"]
        print(f"{v['answer']}  trials={v['trials_run']} r={v['r_used']}")
    return EXIT_YES if verdict.answer else EXIT_NO


def cmd_detect(args, argv) -> int:
    t0 = time.perf_counter()
    g = _load_graph(args.graph)
    plan = _plan(args, g, args.k, args.l)
    t1 = time.perf_counter()
    verdict = D.detect_tree(g, plan)
    t2 = time.perf_counter()
    report = _report(args, argv, g, _plan_fields(plan, args.k, args.l), verdict,
                     {"load": t1 - t0, "detect": t2 - t1})
    return _emit(args, report, verdict)


def cmd_kpath(args, argv, k: int | None = None) -> int:
    t0 = time.perf_counter()
    g = _load_graph(args.graph)
    k = args.k if k is None else k
    if k < 1:
        raise UsageError("k must be at least 1")
    plan = _plan(args, g, max(k, 3), 2)
    t1 = time.perf_counter()
    if getattr(args, "subcubic", False):
        if g.max_degree > 3:
            raise UsageError(f"--subcubic needs maximum degree <= 3, got {g.max_degree}")
        if plan.strategy not in ("random", "color", "fractional"):
            raise UsageError("--subcubic supports the random, color and fractional strategies")
        verdict = kpath_subcubic(g, k, plan)
    else:
        verdict = D.kpath(g, k, plan)
    t2 = time.perf_counter()
    report = _report(args, argv, g, _plan_fields(plan, k, 2), verdict, {"load": t1 - t0, "detect": t2 - t1})
    return _emit(args, report, verdict)


def cmd_ham(args, argv) -> int:
    g = _load_graph(args.graph)
    return cmd_kpath(args, argv, k=max(g.n, 1))


def cmd_kist(args, argv) -> int:
    t0 = time.perf_counter()
    g = _load_graph(args.graph)
    if args.k < 0:
        raise UsageError("k must be non-negative")
    if not 0 < args.alpha <= 1:
        raise UsageError("alpha must be in (0, 1]")
    threads = args.threads if args.threads is not None else D.default_threads()
    plan = D.DetectionPlan(3, 2, epsilon=args.epsilon, seed=args.seed, confidence_boost=args.boost, threads=threads)
    t1 = time.perf_counter()
    verdict = D.kist(g, args.k, plan, alpha=args.alpha)
    t2 = time.perf_counter()
    fields = {"k": args.k, "alpha": args.alpha, "epsilon": args.epsilon, "boost": args.boost, "seed": args.seed}
    report = _report(args, argv, g, fields, verdict, {"load": t1 - t0, "detect": t2 - t1})
    return _emit(args, report, verdict)


def _int_list(text: str) -> list[int]:
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return out


def _write_rows(rows: list[dict], args, stem: str) -> str:
    if args.json:
        text = json.dumps(rows, indent=2)
    else:
        buf = io.StringIO()
        fields = list(rows[0]) if rows else ["graph", "k", "strategy"]
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        text = buf.getvalue()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{stem}.{'json' if args.json else 'csv'}").write_text(text, encoding="utf-8")
    return text


def cmd_bench(args, argv) -> int:
    try:
        corpus = B.load_corpus(args.corpus)
        ks = _int_list(args.k)
    except (FileNotFoundError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    out = Path(args.out) if args.out else None
    if args.mode == "sweep":
        strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
        for s in strategies:
            if s not in ("random", "color", "fractional", "vector"):
                raise UsageError(f"bench supports random, color, fractional, vector; got {s!r}")
        if args.runs < 1:
            raise UsageError("--runs must be at least 1")
        rows = B.sweep(corpus, ks, args.l, strategies, seed=args.seed, boost=args.boost, runs=args.runs)
        text = _write_rows(rows, args, "sweep")
        if out and rows:
            B.plot_sweep(rows, out / "time_vs_k.png")
    elif args.mode == "la-hist":
        rows = B.la_histogram(corpus, ks, samples=args.samples, seed=args.seed)
        text = _write_rows(rows, args, "la_hist")
        if out and rows:
            B.plot_la_histogram(rows, out / "la_tail.png")
    else:
        if args.r is None:
            raise UsageError("scaling mode needs --r")
        rows = []
        rs = _int_list(args.r)
        for name, g in corpus:
            for k in ks:
                for row in B.scaling(g, k, args.l, [r for r in rs if args.l <= r <= 2 * k - 1], seed=args.seed):
                    rows.append({"graph": name, **row})
        text = _write_rows(rows, args, "scaling")
        if out and rows:
            B.plot_scaling(rows, out / "time_vs_r.png")
    sys.stdout.write(text)
    return 0


def cmd_preprocess(args, argv) -> int:
    g = _load_graph(args.graph)
    if g.max_degree > 3:
        raise UsageError(f"maximum degree {g.max_degree} exceeds 3")
    h, trace = eliminate_triangles(g)
    write_graph(h, args.out)
    trace_path = Path(args.trace) if args.trace else Path(str(args.out) + ".trace.json")
    trace_path.write_text(trace.to_json(), encoding="utf-8")
    print(f"{len(trace.steps)} contractions; n={h.n} m={h.m}; wrote {args.out} and {trace_path}")
    return 0


COMMANDS = {
    "detect": cmd_detect,
    "kpath": cmd_kpath,
    "ham": cmd_ham,
    "kist": cmd_kist,
    "bench": cmd_bench,
    "preprocess": cmd_preprocess,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args, argv)
    except (UsageError, GraphFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
