"""Command-line front end: ``diffauction {run,verify,gen,bench,export-dot}``.

Exit codes: 0 success, 1 property violation, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .dot import export_dot
from .generate import GenConfig, gen_random
from .graph import GraphError, InvalidReport, format_rational
from .harness import SUITES, corpus, run_suites
from .io import (ParseError, dumps_graph, dumps_outcome, fixture_text, load_outcome,
                 parse_graph)
from .mechanisms import MECHANISMS, EmptyMarket, WeightedGraph, vickrey

BENCH_COLUMNS = ["instance", "mechanism", "winner", "revenue", "welfare",
                 "vickrey_revenue", "vickrey_welfare"]
BENCH_MECHANISMS = ("vickrey", "cdm-idm", "cdm-beta", "wdm", "wdm-closed")


class UsageError(Exception):
    pass


def _gen_args(p, seeds_default):
    p.add_argument("--n", type=int, default=5, help="buyers per instance")
    p.add_argument("--edge-prob", default="1/2", help="arc probability, exact rational")
    p.add_argument("--value-max", type=int, default=10)
    p.add_argument("--weight-max", type=int, default=5)
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--seeds", type=int, default=seeds_default, help="number of instances")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="diffauction", description="Diffusion auctions on social graphs.")
    parser.add_argument("--tie-break", choices=["lexicographic"], default="lexicographic",
                        help="tie-break order (only lexicographic is implemented)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="evaluate one mechanism on one graph")
    p.add_argument("--mechanism", choices=sorted(MECHANISMS), required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--zero-weights", action="store_true", help="run on the zero-weight projection")
    p.add_argument("--output", choices=["json"], default="json")

    p = sub.add_parser("verify", help="run harness suites over a generated corpus")
    p.add_argument("--suite", default="all", help=f"comma list from {','.join(SUITES)} or 'all'")
    _gen_args(p, 500)
    p.add_argument("--opponents", type=int, default=4, help="random opponent profiles per instance (IC)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--report", help="write the JSON report here")
    p.add_argument("--output", choices=["text", "json"], default="text")

    p = sub.add_parser("gen", help="write graph files")
    _gen_args(p, 1)
    p.add_argument("--negative-weights", action="store_true")
    p.add_argument("--fixture", choices=["fig1"], help="write a bundled graph instead")
    p.add_argument("--out", help="file (one graph) or directory; stdout when omitted")

    p = sub.add_parser("bench", help="revenue/welfare table across mechanisms")
    p.add_argument("--graph", action="append", default=[], help="graph file (repeatable)")
    _gen_args(p, 20)
    p.add_argument("--output", choices=["csv", "json"], default="csv")

    p = sub.add_parser("export-dot", help="graph to Graphviz DOT")
    p.add_argument("--graph", required=True)
    p.add_argument("--outcome", help="outcome JSON whose path is highlighted")
    p.add_argument("--out", help="output file; stdout when omitted")
    return parser


def _config(args, seed):
    return GenConfig(n=args.n, edge_prob=args.edge_prob, value_max=args.value_max,
                     weight_max=args.weight_max, seed=seed,
                     allow_negative_weights=getattr(args, "negative_weights", False))


def cmd_run(args, out):
    graph = parse_graph(args.graph)
    if args.zero_weights:
        graph = graph.zero_weights()
    try:
        outcome = MECHANISMS[args.mechanism](graph, graph.truthful_profile())
    except WeightedGraph as exc:
        raise UsageError(f"{exc} (or pass --zero-weights)") from None
    out.write(dumps_outcome(outcome))
    return 0


def cmd_verify(args, out):
    suites = SUITES if args.suite == "all" else tuple(s.strip() for s in args.suite.split(",") if s.strip())
    bad = set(suites) - set(SUITES)
    if bad:
        raise UsageError(f"unknown suites {sorted(bad)}; choose from {', '.join(SUITES)}")
    instances = corpus(n=args.n, seeds=args.seeds, seed_base=args.seed, edge_prob=args.edge_prob,
                       value_max=args.value_max, weight_max=args.weight_max)
    reports = run_suites(suites, instances, opponent_perturbations=args.opponents, jobs=args.jobs)
    doc = {"instances": len(instances), "reports": [r.to_json() for r in reports.values()]}
    if args.report:
        Path(args.report).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    if args.output == "json":
        out.write(json.dumps(doc, indent=2) + "\n")
    else:
        for r in reports.values():
            out.write(r.summary() + "\n")
    return 0 if all(r.passed for r in reports.values()) else 1


def cmd_gen(args, out):
    if args.fixture:
        texts = [(args.fixture, fixture_text(args.fixture))]
    else:
        texts = [(f"seed-{s:06d}", dumps_graph(gen_random(_config(args, s))))
                 for s in range(args.seed, args.seed + args.seeds)]
    if not args.out:
        for _, text in texts:
            out.write(text)
        return 0
    target = Path(args.out)
    if len(texts) == 1 and target.suffix == ".json":
        target.write_text(texts[0][1], encoding="utf-8")
        return 0
    target.mkdir(parents=True, exist_ok=True)
    for name, text in texts:
        (target / f"{name}.json").write_text(text, encoding="utf-8")
    return 0


def bench_rows(instance, graph):
    truthful = graph.truthful_profile()
    base = vickrey(graph, truthful)
    rows = []
    for name in BENCH_MECHANISMS:
        g, label = graph, name
        if name.startswith("cdm") and not graph.is_unweighted():
            g, label = graph.zero_weights(), f"{name}[zero-weight]"
        try:
            o = MECHANISMS[name](g, g.truthful_profile())
            winner, revenue, welfare = o.winner, format_rational(o.revenue), format_rational(o.welfare)
        except EmptyMarket:
            winner, revenue, welfare = "", "0", "0"
        rows.append({"instance": instance, "mechanism": label, "winner": winner or "",
                     "revenue": revenue, "welfare": welfare,
                     "vickrey_revenue": format_rational(base.revenue),
                     "vickrey_welfare": format_rational(base.welfare)})
    return rows


def cmd_bench(args, out):
    if args.graph:
        instances = [(Path(p).stem, parse_graph(p)) for p in args.graph]
    else:
        instances = [(f"seed-{s:06d}", gen_random(_config(args, s)))
                     for s in range(args.seed, args.seed + args.seeds)]
    rows = []
    for instance, graph in sorted(instances, key=lambda t: t[0]):
        try:
            rows.extend(bench_rows(instance, graph))
        except EmptyMarket:
            continue  # seller without bidding neighbours: nothing to compare
    if args.output == "json":
        out.write(json.dumps(rows, indent=2) + "\n")
        return 0
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    out.write(buf.getvalue())
    return 0


def cmd_export_dot(args, out):
    graph = parse_graph(args.graph)
    path = winner = None
    if args.outcome:
        doc = load_outcome(args.outcome)
        path, winner = doc["path"], doc["winner"]
    text = export_dot(graph, path, winner)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    return 0


COMMANDS = {"run": cmd_run, "verify": cmd_verify, "gen": cmd_gen, "bench": cmd_bench,
            "export-dot": cmd_export_dot}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except (UsageError, ParseError, GraphError, InvalidReport, EmptyMarket,
            ValueError, OSError) as exc:
        print(f"diffauction: error: {exc}", file=sys.stderr)
        return 2


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
