"""Command line entry point.

Examples::

    metapair ingest data/*.csv --out build/
    metapair match transport.csv accidents.csv --out build/ --tau-conn 60
    metapair report transport.csv accidents.csv
    metapair run data/*.csv --seed 7 --out build/ --format dot
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Any, Sequence

from .pipeline import FORMATS, PipelineError, RunConfig, cmd_ingest, cmd_match, cmd_pipeline, manifest_for
from .reports import dumps_json, render_table

logger = logging.getLogger("metapair")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("paths", nargs="*", help="delimited text files (header row first)")
    p.add_argument("--config", help="JSON config file; flags win over its values")
    p.add_argument("--weights", help="regression weights j,d,l summing to 1 (default 0.4,0.3,0.3)")
    p.add_argument("--tau", type=int, help="clustering threshold percent (default 75)")
    p.add_argument("--tau-conn", dest="tau_conn", type=int, help="connection threshold percent (default 70)")
    p.add_argument("--bind-threshold", dest="bind_threshold", type=int, help="pointer bind threshold (default 80)")
    p.add_argument("--seed", type=int, help="annealing seed (default 0)")
    p.add_argument("--steps", type=int, help="annealing steps (default 2000)")
    p.add_argument("--out", help="output directory for reports")
    p.add_argument("--format", choices=FORMATS, help="report encoding (default structured)")
    p.add_argument("--delimiter", help="field separator (default ',')")
    p.add_argument("--lexicon", help="JSON domain lexicon replacing the bundled one")
    p.add_argument("--descriptions", dest="include_descriptions", action="store_true", default=None,
                   help="also score sidecar description texts")
    p.add_argument("--stopwords", dest="remove_stopwords", action="store_true", default=None,
                   help="drop common stopwords from column names")
    p.add_argument("--query", dest="queries", action="append", help="extra pointer profile (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="metapair", description="Metadata pair matching and clustering")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_common(sub.add_parser("ingest", help="profile files and write a catalog manifest"))
    p = sub.add_parser("match", help="score column pairs between datasets")
    _add_common(p)
    p.add_argument("--pair", nargs=2, action="append", metavar=("A", "B"),
                   help="dataset ids to match (repeatable; default all pairs)")
    p = sub.add_parser("report", help="print the similarity grid for two files")
    _add_common(p)
    for name, text in (
        ("cluster", "divide and cluster metadata nodes"),
        ("centers", "cluster and pick meta-centers"),
        ("pool", "cluster, pick centers, pool and traverse"),
        ("run", "full pipeline including pairwise evidence"),
    ):
        _add_common(sub.add_parser(name, help=text))
    return parser


_FLAG_KEYS = ("weights", "tau", "tau_conn", "bind_threshold", "seed", "steps", "out", "format", "delimiter",
              "lexicon", "include_descriptions", "remove_stopwords", "queries")


def config_from_args(args: argparse.Namespace) -> RunConfig:
    base = RunConfig.from_file(args.config) if args.config else RunConfig()
    flags: dict[str, Any] = {k: getattr(args, k) for k in _FLAG_KEYS if getattr(args, k, None) is not None}
    if args.paths:
        flags["inputs"] = args.paths
    return RunConfig.from_mapping(flags, base)


def _run(args: argparse.Namespace) -> int:
    config = config_from_args(args)
    if not config.inputs:
        raise PipelineError("ingest", "no input files given")

    if args.command == "ingest":
        result = cmd_ingest(config.inputs, config)
        if not config.out_dir:
            sys.stdout.write(dumps_json(manifest_for(result)))
        return 0 if result.ok else 1

    if args.command in ("match", "report"):
        catalog = cmd_ingest(config.inputs, RunConfig.from_mapping({"out": None}, config))
        if not catalog.records:
            raise PipelineError("ingest", "no dataset could be loaded")
        pairs = [tuple(p) for p in args.pair] if getattr(args, "pair", None) else None
        if args.command == "report":
            if len(catalog.records) != 2:
                raise PipelineError("report", "report takes exactly two readable files")
            res = cmd_match(catalog.records, RunConfig.from_mapping({"out": None}, config))[0]
            sys.stdout.write(render_table(res.a, res.b, res.triples))
            return 0 if catalog.ok else 1
        results = cmd_match(catalog.records, config, pairs)
        if not config.out_dir:
            payload = [
                {"triples": [t.to_record() for t in r.triples], "evidence": r.evidence.to_record()} for r in results
            ]
            sys.stdout.write(dumps_json(payload))
        return 0 if catalog.ok else 1

    res = cmd_pipeline(config, stop_after=args.command)
    summary = {
        "datasets": len(res.catalog.records),
        "errors": [{"path": p, "error": e} for p, e in res.catalog.errors],
        "spaces": len(res.spaces),
        "collections": len(res.collections),
        "centers": len(res.centers),
        "channels": len(res.channels),
        "cycles": len(res.log),
        "edges": len(res.graph.edges),
        "connected_pairs": sum(m.evidence.connected for m in res.matches),
    }
    sys.stdout.write(json.dumps(summary, sort_keys=True) + "\n")
    return 0 if res.ok else 1


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return _run(args)
    except PipelineError as exc:
        logger.error("%s", exc)
        return 2
    except (ValueError, OSError) as exc:
        logger.error("config: %s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
