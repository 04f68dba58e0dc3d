"""Command-line entry point: run, explain, render and bench subcommands.

Exit codes: 0 success, 1 program error (syntax/analysis/unknown relation),
2 runtime error (evaluation, conversion, I/O). Diagnostics go to stderr,
data to stdout.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
import time
from pathlib import Path

from .analyzer import analyze
from .engine import EvalConfig, evaluate
from .errors import AnalysisError, GtlogError, GtlogSyntaxError
from .graph_io import (export_relation, load_edges, load_labels,
                       load_relation_json, load_triples)
from .parser import parse_program
from .plan import explain as explain_plan_text
from .relation import Relation
from .render import to_dot, to_json_graph, to_render_edges
from .values import display
from . import compiler, stdlib


def _parse_binding(spec: str):
    """NAME=path[:kind] with kind in {edges, triples, labels, json};
    default kind by extension (.json -> json, otherwise edges)."""
    if "=" not in spec:
        raise argparse.ArgumentTypeError(f"--rel expects NAME=path, got {spec!r}")
    name, _, path = spec.partition("=")
    kind = None
    if ":" in path and not Path(path).exists():
        path, _, kind = path.rpartition(":")
    return name, path, kind


def _load_relation(name: str, path: str, kind, string_columns=()):
    ext = Path(path).suffix.lower()
    if kind is None:
        kind = "json" if ext == ".json" else "edges"
    if kind == "json":
        rel = load_relation_json(path)
        return Relation(name, rel.num_positional, rel.named_attrs,
                        rel.has_value, rel.rows)
    if kind == "triples":
        return load_triples(path, name)
    if kind == "labels":
        return load_labels(path, name)
    fmt = "tsv" if ext in (".tsv", ".tab") else "csv"
    return load_edges(path, fmt, name, string_columns=string_columns)


def _bindings(args) -> dict:
    string_cols: dict = {}
    for spec in getattr(args, "as_string", None) or []:
        name, _, cols = spec.partition("=")
        string_cols[name] = {int(c) for c in cols.split(",") if c}
    rels = {}
    for spec in args.rel or []:
        name, path, kind = _parse_binding(spec)
        rels[name] = _load_relation(name, path, kind,
                                    string_cols.get(name, ()))
    return rels


def _config(args) -> EvalConfig:
    config = EvalConfig()
    if getattr(args, "depth", None) is not None:
        config.default_depth = args.depth
    if getattr(args, "trace", False):
        config.trace = True
    backstop = os.environ.get("GTLOG_MAX_ITERS")
    if backstop is not None:
        config.max_iters_backstop = int(backstop)
    return config


def cmd_run(args) -> int:
    program = parse_program(Path(args.program).read_text(encoding="utf-8"))
    rels = _bindings(args)
    result = evaluate(program, rels, _config(args))
    requested = [n for spec in (args.out or []) for n in spec.split(",") if n]
    fmt = args.format or "csv"
    if requested:
        out_dir = Path(args.out_dir or ".")
        out_dir.mkdir(parents=True, exist_ok=True)
        for name in requested:
            rel = result.relation(name)
            export_relation(rel, out_dir / f"{name}.{fmt}", fmt)
    else:
        derived = sorted(n for n in result.snapshot.relations if n not in rels)
        for name in derived:
            rel = result.relation(name)
            print(f"# relation {name} ({', '.join(rel.columns())})")
            for row in rel.rows:
                print(",".join(display(v) for v in row))
    return 0


def cmd_explain(args) -> int:
    program = parse_program(Path(args.program).read_text(encoding="utf-8"))
    rels = _bindings(args)
    analysis = analyze(program, extensional=rels, infer_extensional=True)
    out = []
    out.append("strata:")
    for i, stratum in enumerate(analysis.plan.strata, start=1):
        notes = []
        for p in stratum:
            sig = analysis.signatures[p]
            if sig.is_extensional and p not in analysis.rules:
                notes.append("extensional")
        clique = next((c for c in analysis.plan.recursive_cliques
                       if c.preds == stratum), None)
        if clique is not None:
            notes.append(f"recursive, mode={clique.mode}")
            if clique.semi_naive_ok:
                notes.append("semi-naive")
        suffix = f"  [{'; '.join(notes)}]" if notes else ""
        out.append(f"  {i}. {', '.join(stratum)}{suffix}")
    out.append("cliques:")
    if not analysis.plan.recursive_cliques:
        out.append("  none")
    for c in analysis.plan.recursive_cliques:
        d = c.directive
        depth = d.depth if d is not None else "default"
        stop = d.stop_predicate if d is not None and d.stop_predicate else "-"
        aux = f" helpers=[{', '.join(c.stop_aux)}]" if c.stop_aux else ""
        out.append(f"  {{{', '.join(c.preds)}}} mode={c.mode} depth={depth} "
                   f"stop={stop}{aux}")
    out.append("rules:")
    for pred in sorted(analysis.rules):
        sig = analysis.signatures[pred]
        for nr in analysis.rules[pred]:
            from .ast_nodes import fmt_rule
            out.append(f"  {fmt_rule(nr.source)}")
            rule_plan = compiler.compile_rule(nr, analysis.signatures)
            out.append("\n".join("    " + line
                                 for line in explain_plan_text(rule_plan).splitlines()))
        if sig.value_agg is not None or sig.attr_aggs:
            aggs = [f"{a}:{k}" for a, k in sig.attr_aggs]
            if sig.value_agg is not None:
                aggs.append(f"value:{sig.value_agg}")
            out.append(f"  {pred}: aggregate per key ({', '.join(aggs)})")
        else:
            out.append(f"  {pred}: distinct")
    print("\n".join(out))
    return 0


def cmd_render(args) -> int:
    program = parse_program(Path(args.program).read_text(encoding="utf-8"))
    rels = _bindings(args)
    result = evaluate(program, rels, _config(args))
    relation = result.relation(args.pred)
    edges = to_render_edges(relation, color_column=args.color_col,
                            width_column=args.width_col)
    text = to_dot(edges) if args.format == "dot" else to_json_graph(edges)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


# ------------------------------------------------------------------ bench

def synthetic_taxonomy(triples: int, branching: int, items: int, seed: int):
    """A parent-edge tree over ~triples/2 nodes plus unrelated noise triples,
    labels for every node, and `items` leaves inside one subtree so the
    ancestor chains merge below the root."""
    rng = random.Random(seed)
    n = max(triples // 2, items * branching + 2)
    names = [f"Q{i}" for i in range(n)]
    t_rows = []
    for i in range(1, n):
        t_rows.append((names[i], "P171", names[(i - 1) // branching]))
    while len(t_rows) < triples:
        a = rng.randrange(n)
        b = rng.randrange(n)
        t_rows.append((names[a], "P31", names[b]))
    labels = [(names[i], f"taxon {i}") for i in range(n)]

    def walk(start: int) -> int:
        node = start
        while True:
            first_child = node * branching + 1
            if first_child >= n:
                return node
            node = rng.randrange(first_child, min(first_child + branching, n))

    interest = set()
    while len(interest) < min(items, max(n // 2, 1)):
        interest.add(names[walk(1)])
    return t_rows, labels, sorted(interest)


def cmd_bench(args) -> int:
    t0 = time.monotonic()
    t_rows, labels, interest = synthetic_taxonomy(
        args.triples, args.branching, args.items, args.seed)
    gen_s = time.monotonic() - t0
    t1 = time.monotonic()
    result = stdlib.extract_taxonomy(t_rows, labels, interest, depth=args.depth)
    eval_s = time.monotonic() - t1
    try:
        import psutil
        peak_mb = psutil.Process().memory_info().rss / (1024 * 1024)
    except ImportError:  # pragma: no cover
        peak_mb = float("nan")
    print(f"bench triples={args.triples} branching={args.branching} "
          f"items={args.items} seed={args.seed} gen_s={gen_s:.2f} "
          f"eval_s={eval_s:.2f} iterations={result.iterations} "
          f"termination={result.termination} edges={len(result.edges)} "
          f"rss_mb={peak_mb:.0f}")
    return 0


# ------------------------------------------------------------------- main

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gtlog",
                                     description="rule-based graph transformations")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--rel", action="append", metavar="NAME=PATH[:KIND]",
                       help="bind an extensional relation from a file")
        p.add_argument("--as-string", action="append", dest="as_string",
                       metavar="NAME=COLS",
                       help="comma-separated column indexes to keep as strings")
        p.add_argument("--depth", type=int, default=None,
                       help="default iteration cap for cliques without a directive")
        p.add_argument("--trace", action="store_true",
                       help="print per-iteration row counts to stderr")

    p_run = sub.add_parser("run", help="evaluate a program")
    p_run.add_argument("program")
    add_common(p_run)
    p_run.add_argument("--out", action="append", metavar="P1,P2",
                       help="relations to export (repeatable)")
    p_run.add_argument("--out-dir", default=None)
    p_run.add_argument("--format", choices=("csv", "json"), default=None)
    p_run.set_defaults(func=cmd_run)

    p_explain = sub.add_parser("explain", help="print strata, cliques and plans")
    p_explain.add_argument("program")
    p_explain.add_argument("--rel", action="append", metavar="NAME=PATH[:KIND]")
    p_explain.add_argument("--as-string", action="append", dest="as_string")
    p_explain.set_defaults(func=cmd_explain)

    p_render = sub.add_parser("render", help="evaluate and export a render relation")
    p_render.add_argument("program")
    add_common(p_render)
    p_render.add_argument("--pred", required=True)
    p_render.add_argument("--format", choices=("dot", "json"), default="dot")
    p_render.add_argument("--color-col", default="color")
    p_render.add_argument("--width-col", default="width")
    p_render.add_argument("-o", "--out", default=None)
    p_render.set_defaults(func=cmd_render)

    p_bench = sub.add_parser("bench", help="synthetic taxonomy benchmark")
    p_bench.add_argument("--triples", type=int, default=1_000_000)
    p_bench.add_argument("--branching", type=int, default=3)
    p_bench.add_argument("--items", type=int, default=4)
    p_bench.add_argument("--seed", type=int, default=7)
    p_bench.add_argument("--depth", type=int, default=-1)
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GtlogSyntaxError, AnalysisError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except GtlogError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
