"""Command-line front end.

    rcnet query --net net.json [--evidence e.json] [--cache full|none|budget:N]
                [--kb on|off] [--log-space on|off] [--dtree-out d.json]
    rcnet stats --net net.json [--dtree-in d.json] [--dtree-out d.json]
                [--dtree-dot d.dot]
    rcnet bench --instances N [--max-vars N] [--max-states N]
                [--determinism F] [--seed N] [--oracle]
    rcnet kb-dump --net net.json [--out clauses.txt]

query and stats print one pretty JSON report; bench prints one JSON
line per generated instance.  Exit code 2 signals a parse or validation
problem, reported as a single diagnostic line on stderr.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time

from .dtree import (
    annotate,
    build_dtree,
    dtree_from_json,
    dtree_stats,
    dtree_to_dot,
    dtree_to_json,
    mark_dead_caches,
    min_fill_order,
)
from .engine import CachePolicy, brute_force_probability, rc_query
from .kb import compile_kb
from .model import NetworkFormatError, parse_evidence, parse_network
from .randnet import random_evidence, random_network
from .spaces import space_report

__all__ = ["main"]


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _load_network(path: str):
    return parse_network(_read(path))


def _prepared_dtree(network, dtree_in: str | None):
    order = min_fill_order(network)
    if dtree_in is None:
        root = build_dtree(network, order)
    else:
        root = dtree_from_json(network, _read(dtree_in))
    annotate(root)
    dead = mark_dead_caches(root)
    return root, order, dead


def _dtree_report(root, dead: int) -> dict:
    stats = dtree_stats(root)
    return {
        "width": stats.width,
        "context_width": stats.context_width,
        "cache_cells_all": stats.cache_cells_all,
        "cache_cells_live": stats.cache_cells_live,
        "dead_caches": dead,
    }


def _space_dict(report) -> dict:
    return {
        "hugin_cells": report.hugin_cells,
        "shenoy_shafer_cells": report.shenoy_shafer_cells,
        "ve_cells": report.ve_cells,
        "rc_cells_all": report.rc_cells_all,
        "rc_cells_live": report.rc_cells_live,
    }


def cmd_query(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    network = _load_network(args.net)
    evidence = parse_evidence(_read(args.evidence), network) if args.evidence else {}
    root, order, dead = _prepared_dtree(network, None)
    if args.dtree_out:
        _write(args.dtree_out, dtree_to_json(root))
    kb = compile_kb(network) if args.kb == "on" else None
    result = rc_query(
        network,
        root,
        evidence,
        policy=CachePolicy.parse(args.cache),
        kb=kb,
        log_domain=args.log_space == "on",
    )
    report = {
        "network": args.net,
        "dtree": _dtree_report(root, dead),
        "space": _space_dict(space_report(network, order, root)),
        "query": result.to_json_dict(),
        "kb_size": (
            {"clauses": kb.n_clauses, "literals": kb.n_literals} if kb is not None else None
        ),
        "seed": args.seed,
        "wall_time_s": time.perf_counter() - started,
    }
    print(json.dumps(report, indent=2))
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    network = _load_network(args.net)
    root, order, dead = _prepared_dtree(network, args.dtree_in)
    if args.dtree_out:
        _write(args.dtree_out, dtree_to_json(root))
    if args.dtree_dot:
        _write(args.dtree_dot, dtree_to_dot(root))
    report = {
        "network": args.net,
        "dtree": _dtree_report(root, dead),
        "space": _space_dict(space_report(network, order, root)),
        "wall_time_s": time.perf_counter() - started,
    }
    print(json.dumps(report, indent=2))
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    rng = random.Random(args.seed)
    for i in range(args.instances):
        line: dict = {"instance": i}
        try:
            network = random_network(
                rng,
                max_vars=args.max_vars,
                max_states=args.max_states,
                determinism=args.determinism,
                max_joint=args.oracle_limit,
            )
            evidence = random_evidence(rng, network)
            root, order, dead = _prepared_dtree(network, None)
            kb = compile_kb(network)
            plain = rc_query(network, root, evidence)
            pruned = rc_query(network, root, evidence, kb=kb)
            line.update(
                {
                    "vars": network.n,
                    "joint_size": network.joint_size(),
                    "evidence_vars": len(evidence),
                    "probability_nokb": plain.probability,
                    "probability_kb": pruned.probability,
                    "probability_delta": abs(plain.probability - pruned.probability),
                    "rc_calls_nokb": plain.rc_calls,
                    "rc_calls_kb": pruned.rc_calls,
                    "call_ratio": (
                        plain.rc_calls / pruned.rc_calls if pruned.rc_calls else None
                    ),
                    "kb_skips": pruned.kb_skips,
                    "kb_evidence_contradiction": pruned.kb_evidence_contradiction,
                    "kb_clauses": kb.n_clauses,
                    "kb_literals": kb.n_literals,
                    "dtree_width": dtree_stats(root).width,
                    "dead_caches": dead,
                }
            )
            if args.oracle and network.joint_size() <= args.oracle_limit:
                expected = brute_force_probability(network, evidence)
                line["oracle"] = expected
                line["oracle_delta"] = abs(plain.probability - expected)
            else:
                line["oracle"] = None
                line["oracle_delta"] = None
            line["error"] = None
        except Exception as exc:  # keep the run going, record the failure
            line["error"] = f"{type(exc).__name__}: {exc}"
        print(json.dumps(line))
    return 0


def cmd_kb_dump(args: argparse.Namespace) -> int:
    network = _load_network(args.net)
    kb = compile_kb(network)
    text = kb.format_clauses(network)
    if args.out:
        _write(args.out, text + ("\n" if text else ""))
    else:
        print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rcnet",
        description="Exact probability-of-evidence queries by recursive conditioning.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    query = sub.add_parser("query", help="compute the probability of evidence")
    query.add_argument("--net", required=True, help="network document (JSON)")
    query.add_argument("--evidence", help="evidence document (JSON)")
    query.add_argument("--cache", default="full", help="full, none, or budget:N")
    query.add_argument("--kb", choices=["on", "off"], default="off",
                       help="prune zero-probability branches by unit resolution")
    query.add_argument("--log-space", choices=["on", "off"], default="off")
    query.add_argument("--seed", type=int, default=None,
                       help="recorded in the report; queries are deterministic")
    query.add_argument("--dtree-out", help="write the dtree used (JSON)")
    query.set_defaults(func=cmd_query)

    stats = sub.add_parser("stats", help="dtree widths and space-model accounting")
    stats.add_argument("--net", required=True)
    stats.add_argument("--dtree-in", help="use this dtree instead of min-fill")
    stats.add_argument("--dtree-out")
    stats.add_argument("--dtree-dot", help="write a DOT rendering of the dtree")
    stats.set_defaults(func=cmd_stats)

    bench = sub.add_parser("bench", help="randomized KB-on/off benchmark, JSON lines")
    bench.add_argument("--instances", type=int, required=True)
    bench.add_argument("--max-vars", type=int, default=10)
    bench.add_argument("--max-states", type=int, default=4)
    bench.add_argument("--determinism", type=float, default=0.0,
                       help="fraction of CPT cells forced to zero")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--oracle", action="store_true",
                       help="also run the enumeration oracle when feasible")
    bench.add_argument("--oracle-limit", type=int, default=4000,
                       help="largest joint state space to enumerate")
    bench.set_defaults(func=cmd_bench)

    dump = sub.add_parser("kb-dump", help="print the compiled clauses")
    dump.add_argument("--net", required=True)
    dump.add_argument("--out")
    dump.set_defaults(func=cmd_kb_dump)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (NetworkFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
