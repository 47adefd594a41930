"""Command-line front end: generate, search, bench, simulate, serve.

Exit codes: 0 success, 2 user or configuration error (bad flags, filter
syntax, invalid request shape), 3 data error (unreadable corpus, unknown
property, missing file), 4 unexpected internal failure.

If SENSORSEARCH_DATA is set, bare corpus file names that do not exist
relative to the working directory are looked up inside that directory.
"""

from __future__ import annotations

import argparse
import json
import os
import resource
import sys
import time
from typing import Any

from . import corpus as corpus_mod
from .corpus import Corpus, GeneratorConfig
from .distributed import (fit_record_size, load_topology, saving_grid,
                          simulate_timeline)
from .engine import (DEFAULT_RECORD_SIZE_BYTES, Engine, parse_search_request)
from .errors import (ConfigError, EmptyPriority, InvalidFilter, InvalidK,
                     InvalidRequest, KeyMismatch, LoadError, MissingProperty,
                     NoCorpus, OutOfBounds, ParseError, SimFault,
                     UnknownProperty)

DATA_DIR_ENV = "SENSORSEARCH_DATA"

_USER_ERRORS = (ParseError, InvalidFilter, InvalidRequest, InvalidK,
                EmptyPriority, KeyMismatch, ConfigError, SimFault)
_DATA_ERRORS = (LoadError, UnknownProperty, MissingProperty, OutOfBounds,
                NoCorpus, FileNotFoundError, IsADirectoryError,
                PermissionError)


def _json_arg(text: str, name: str) -> Any:
    """Parse an inline JSON argument, or @path to read it from a file."""
    if text.startswith("@"):
        try:
            with open(text[1:], "r", encoding="utf-8") as handle:
                text = handle.read()
        except OSError as exc:
            raise InvalidRequest(f"cannot read {name} file: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidRequest(f"{name} is not valid JSON: {exc.msg}") from exc


def _emit(args: argparse.Namespace, payload: dict, table: str) -> None:
    if args.format == "machine":
        print(json.dumps(payload, sort_keys=True))
    else:
        print(table)


def _format_error(exc: Exception) -> str:
    if isinstance(exc, ParseError):
        return f"filter parse error: {exc}"
    if isinstance(exc, LoadError):
        return f"corpus load error: {exc}"
    return f"{type(exc).__name__}: {exc}"


# -- request assembly --------------------------------------------------------


def _request_doc(args: argparse.Namespace) -> dict:
    doc: dict[str, Any] = {"n": args.n}
    if args.query:
        if args.query.startswith("@"):
            try:
                with open(args.query[1:], "r", encoding="utf-8") as handle:
                    doc["query"] = handle.read()
            except OSError as exc:
                raise InvalidRequest(f"cannot read query file: {exc}") from exc
        else:
            doc["query"] = args.query
    if args.priorities is None:
        raise InvalidRequest("--priorities is required")
    doc["priorities"] = _json_arg(args.priorities, "--priorities")
    if args.ideal is not None:
        doc["ideal"] = _json_arg(args.ideal, "--ideal")
    if args.margin is not None:
        doc["heuristic"] = {"enabled": True, "margin": args.margin}
    return doc


def _resolve_data_path(path: str) -> str:
    """Fall back to $SENSORSEARCH_DATA for bare names that don't exist here."""
    data_dir = os.environ.get(DATA_DIR_ENV)
    if (data_dir and not os.path.exists(path)
            and os.sep not in path and not os.path.isabs(path)):
        candidate = os.path.join(data_dir, path)
        if os.path.exists(candidate):
            return candidate
    return path


def _load_engine(path: str) -> Engine:
    return Engine(corpus=corpus_mod.load(_resolve_data_path(path)))


def _default_priorities(corpus: Corpus) -> list[dict]:
    return [{"key": key, "slider": 100.0} for key in corpus.property_keys]


# -- subcommands --------------------------------------------------------------


def _pick_keys(args: argparse.Namespace) -> tuple[str, ...]:
    if args.keys and args.properties:
        raise InvalidRequest("use --keys or --properties, not both")
    if args.keys:
        return tuple(args.keys.split(","))
    if args.properties:
        from .core import canonical_registry
        catalogue = tuple(canonical_registry().keys())
        if not 1 <= args.properties <= len(catalogue):
            raise InvalidRequest(
                f"--properties must be in 1..{len(catalogue)}")
        return catalogue[:args.properties]
    return corpus_mod.DEFAULT_KEYS_5


def _cmd_generate(args: argparse.Namespace) -> int:
    config = GeneratorConfig(
        count=args.count,
        property_keys=_pick_keys(args),
        seed=args.seed,
    )
    config.validate()
    generated = Corpus.from_config(config)
    digest = corpus_mod.save(generated, args.out)
    payload = {"path": args.out, "count": len(generated),
               "snapshot_id": generated.snapshot_id, "sha256": digest,
               "properties": list(generated.property_keys)}
    _emit(args, payload,
          f"wrote {len(generated)} sensors to {args.out}\n"
          f"snapshot {generated.snapshot_id}\n"
          f"properties: {', '.join(generated.property_keys)}")
    return 0


def _render_search_table(response: dict) -> str:
    rows = [("uid", "score", "type", "region")]
    for entry in response["entries"]:
        rows.append((entry["uid"], f"{entry['cpwi']:.6f}",
                     entry["sensor_type"], entry["region"]))
    widths = [max(len(row[i]) for row in rows) for i in range(4)]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row))
             for row in rows]
    diag = response["diagnostics"]
    lines.append("")
    lines.append(f"{response['count']} of {response['n']} requested "
                 f"(candidates {diag['candidates_before']} -> "
                 f"{diag['candidates_after_prune']}, "
                 f"{diag['excluded_missing_property']} excluded for "
                 f"missing properties)")
    timing = response["timing_ms"]
    lines.append(f"filter {timing['filter']:.2f} ms, prune "
                 f"{timing['prune']:.2f} ms, rank {timing['rank']:.2f} ms")
    return "\n".join(lines)


def _cmd_search(args: argparse.Namespace) -> int:
    engine = _load_engine(args.corpus)
    response = engine.search(_request_doc(args))
    _emit(args, response, _render_search_table(response))
    return 0


def _parse_int_list(text: str, name: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise InvalidRequest(f"{name} must be comma-separated integers") from exc
    if not values:
        raise InvalidRequest(f"{name} must not be empty")
    return values


def _bench_grid(args: argparse.Namespace) -> int:
    """Seeded grid over corpus sizes x property counts x {exact, cphf(M)}."""
    sizes = _parse_int_list(args.sizes, "--sizes")
    prop_counts = _parse_int_list(args.props, "--props")
    margins = _parse_int_list(args.margins, "--margins")
    rows = []
    for size in sorted(sizes):
        for props in sorted(prop_counts):
            keys = (corpus_mod.DEFAULT_KEYS_10 if props == 10
                    else corpus_mod.DEFAULT_KEYS_5 if props == 5 else None)
            if keys is None:
                raise InvalidRequest("--props entries must be 5 or 10")
            config = GeneratorConfig(count=size, property_keys=keys,
                                     seed=args.seed)
            engine = Engine(corpus=Corpus.from_config(config))
            base = {"priorities": _default_priorities(engine.corpus),
                    "n": min(args.n, size)}
            exact = engine.search(base)
            exact_uids = [entry["uid"] for entry in exact["entries"]]
            timing = exact["timing_ms"]
            rows.append({"size": size, "properties": props, "mode": "exact",
                         "filter_ms": timing["filter"],
                         "prune_ms": timing["prune"],
                         "rank_ms": timing["rank"], "accuracy": 1.0})
            for margin in margins:
                doc = dict(base)
                doc["heuristic"] = {"enabled": True, "margin": float(margin)}
                pruned = engine.search(doc)
                overlap = len(set(exact_uids)
                              & {e["uid"] for e in pruned["entries"]})
                timing = pruned["timing_ms"]
                rows.append({"size": size, "properties": props,
                             "mode": f"cphf(M={margin})",
                             "filter_ms": timing["filter"],
                             "prune_ms": timing["prune"],
                             "rank_ms": timing["rank"],
                             "accuracy": overlap / base["n"]})
    header = ("size", "properties", "mode", "filter_ms", "prune_ms",
              "rank_ms", "accuracy")
    table_rows = [header]
    for row in rows:
        table_rows.append((str(row["size"]), str(row["properties"]),
                           row["mode"], f"{row['filter_ms']:.2f}",
                           f"{row['prune_ms']:.2f}", f"{row['rank_ms']:.2f}",
                           f"{row['accuracy']:.3f}"))
    widths = [max(len(r[i]) for r in table_rows) for i in range(len(header))]
    text = "\n".join("  ".join(cell.ljust(widths[i])
                               for i, cell in enumerate(row))
                     for row in table_rows)
    _emit(args, {"rows": rows}, text)
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    if args.grid:
        return _bench_grid(args)
    if args.corpus:
        loaded = corpus_mod.load(_resolve_data_path(args.corpus))
    else:
        config = GeneratorConfig(count=args.count, property_keys=_pick_keys(args),
                                 seed=args.seed)
        config.validate()
        loaded = Corpus.from_config(config)
    engine = Engine(corpus=loaded)
    if args.priorities is None:
        args.priorities = json.dumps(_default_priorities(loaded))
    doc = _request_doc(args)
    started = time.perf_counter()
    response = engine.search(doc)
    elapsed_ms = (time.perf_counter() - started) * 1e3
    rss_mb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0
    timing = response["timing_ms"]
    payload = {"count": len(loaded), "n": args.n,
               "filter_ms": timing["filter"], "prune_ms": timing["prune"],
               "rank_ms": timing["rank"], "total_ms": elapsed_ms,
               "peak_rss_mb": rss_mb,
               "returned": response["count"]}
    _emit(args, payload,
          f"{len(loaded)} sensors, top {args.n}\n"
          f"filter {timing['filter']:.1f} ms  prune {timing['prune']:.1f} ms  "
          f"rank {timing['rank']:.1f} ms  total {elapsed_ms:.1f} ms\n"
          f"peak rss {rss_mb:.1f} MB")
    return 0


def _render_table3(fit) -> str:
    lines = [f"fitted record size: {fit.record_size:.2f} bytes "
             f"(shipping default {DEFAULT_RECORD_SIZE_BYTES})",
             f"cells within tolerance: {fit.fraction_within():.1%}", ""]
    n_values = sorted({cell.n_requested for cell in fit.cells})
    k_values = sorted({cell.k for cell in fit.cells})
    by_pos = {(cell.k, cell.n_requested): cell for cell in fit.cells}
    header = ["k\\N"] + [str(n) for n in n_values]
    rows = [header]
    for k in k_values:
        row = [str(k)]
        for n in n_values:
            cell = by_pos.get((k, n))
            row.append("-" if cell is None
                       else f"{cell.predicted_mb:+.1f}({cell.reference_mb:+.1f})")
        rows.append(row)
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    for row in rows:
        lines.append("  ".join(cell.rjust(widths[i])
                               for i, cell in enumerate(row)))
    lines.append("")
    lines.append("cells are predicted(reference) saving in MB; - where k >= N")
    return "\n".join(lines)


def _cmd_simulate(args: argparse.Namespace) -> int:
    if args.table3:
        fit = fit_record_size()
        payload = {
            "record_size": fit.record_size,
            "fraction_within": fit.fraction_within(),
            "cells": [{"k": cell.k, "n": cell.n_requested,
                       "reference_mb": cell.reference_mb,
                       "predicted_mb": cell.predicted_mb,
                       "error_mb": cell.error_mb,
                       "within": cell.within()} for cell in fit.cells],
            "grid": {f"{k},{n}": value for (k, n), value in
                     sorted(saving_grid(fit.record_size).items())},
        }
        _emit(args, payload, _render_table3(fit))
        return 0
    if args.topology:
        outcome = _simulate_from_topology(args)
    else:
        if not args.corpus:
            raise InvalidRequest("simulate needs --corpus or --topology "
                                 "(or --table3)")
        engine = _load_engine(args.corpus)
        if args.priorities is None:
            args.priorities = json.dumps(_default_priorities(engine.corpus))
        doc: dict[str, Any] = {
            "strategy": args.strategy,
            "nodes": args.nodes,
            "latency_ms": args.latency_ms,
            "processing_ms": args.processing_ms,
            "record_size_bytes": args.record_size,
            "request": _request_doc(args),
        }
        if args.bandwidth_mbps is not None:
            doc["bandwidth_MBps"] = args.bandwidth_mbps
        if args.k is not None:
            doc["k"] = args.k
        outcome = engine.simulate(doc)
    lines = [f"strategy {outcome['strategy']}"
             + (f" (k={outcome['k']})" if outcome.get("k") else ""),
             f"total time {outcome['total_time_ns'] / 1e6:.3f} ms over "
             f"{outcome['rounds']} round(s)",
             f"bytes moved {outcome['total_bytes']}"]
    for link in outcome["bytes_by_link"]:
        lines.append(f"  node {link['src']} -> node {link['dst']}: "
                     f"{link['bytes']} bytes")
    lines.append("top results:")
    for entry in outcome["result"]["entries"][:10]:
        lines.append(f"  {entry['uid']}  {entry['cpwi']:.6f}")
    _emit(args, outcome, "\n".join(lines))
    return 0


def _simulate_from_topology(args: argparse.Namespace) -> dict:
    """Run a strategy over a topology file listing per-node corpus paths."""
    if args.strategy == "local":
        raise InvalidRequest("topology simulation needs a distributed strategy")
    topology = load_topology(_resolve_data_path(args.topology))
    if not topology.corpus_paths or not all(topology.corpus_paths):
        raise InvalidRequest("topology file must name a corpus_path per node")
    from .core import canonical_registry
    registry = canonical_registry()
    corpora = [corpus_mod.load(_resolve_data_path(path), registry)
               for path in topology.corpus_paths]
    if args.priorities is None:
        args.priorities = json.dumps(_default_priorities(corpora[0]))
    request = parse_search_request(_request_doc(args))
    outcome = simulate_timeline(args.strategy, topology, corpora, request,
                                k=args.k)
    return outcome.to_dict()


def _cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve
    engine = Engine()
    if args.corpus:
        engine.set_corpus(corpus_mod.load(args.corpus))
    print(f"serving on http://{args.host}:{args.port}", file=sys.stderr)
    try:
        serve(engine, host=args.host, port=args.port, verbose=args.verbose)
    except KeyboardInterrupt:
        pass
    return 0


# -- parser -------------------------------------------------------------------


def _add_request_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--query", default="",
                     help="filter expression, or @file to read one")
    sub.add_argument("--priorities",
                     help="JSON list of {key, slider[, included]}, or @file")
    sub.add_argument("--ideal", help="JSON object of native ideal values, or @file")
    sub.add_argument("-n", "--n", type=int, default=50,
                     help="results to return (default 50)")
    sub.add_argument("--margin", type=float, default=None,
                     help="enable heuristic pruning with this margin (0..100)")


def _add_format_flag(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--format", choices=("table", "machine"), default="table",
                     help="table for humans, machine for sorted-key JSON")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sensorsearch",
        description="Context-aware sensor search over property corpora.")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("generate", help="write a seeded sensor corpus")
    gen.add_argument("--count", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--properties", type=int, default=None,
                     help="number of properties, first N of the catalogue")
    gen.add_argument("--keys", help="comma-separated property keys")
    gen.add_argument("--out", required=True, help="output corpus path")
    _add_format_flag(gen)
    gen.set_defaults(func=_cmd_generate)

    search = commands.add_parser("search", help="rank sensors from a corpus file")
    search.add_argument("--data", "--corpus", dest="corpus", required=True,
                        help="corpus file to search")
    _add_request_flags(search)
    _add_format_flag(search)
    search.set_defaults(func=_cmd_search)

    bench = commands.add_parser(
        "bench", help="time one search end to end, or --grid for the full sweep")
    bench.add_argument("--data", "--corpus", dest="corpus",
                       help="corpus file (otherwise generate)")
    bench.add_argument("--count", type=int, default=100_000)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--properties", type=int, default=None,
                       help="number of properties, first N of the catalogue")
    bench.add_argument("--keys", help="comma-separated property keys")
    bench.add_argument("--grid", action="store_true",
                       help="run the sizes x properties x margins sweep")
    bench.add_argument("--sizes", default="1000,10000",
                       help="grid corpus sizes, comma-separated")
    bench.add_argument("--props", default="5",
                       help="grid property counts (5 or 10), comma-separated")
    bench.add_argument("--margins", default="0,50,100",
                       help="grid heuristic margins, comma-separated")
    _add_request_flags(bench)
    _add_format_flag(bench)
    bench.set_defaults(func=_cmd_bench)

    sim = commands.add_parser("simulate",
                              help="run a distributed strategy, or --table3")
    sim.add_argument("--data", "--corpus", dest="corpus",
                     help="corpus to split across simulated nodes")
    sim.add_argument("--topology",
                     help="topology file with per-node corpus paths and links")
    sim.add_argument("--strategy",
                     choices=("local", "chain", "parallel", "parallel_k"),
                     default="parallel")
    sim.add_argument("--k", type=int, default=None)
    sim.add_argument("--nodes", type=int, default=4)
    sim.add_argument("--latency-ms", type=float, default=10.0)
    sim.add_argument("--bandwidth-mbps", type=float, default=None,
                     help="link bandwidth in MB/s (default unbounded)")
    sim.add_argument("--processing-ms", type=float, default=5.0)
    sim.add_argument("--record-size", type=int,
                     default=DEFAULT_RECORD_SIZE_BYTES)
    sim.add_argument("--table3", action="store_true",
                     help="emit the analytic saving grid and fitted record size")
    _add_request_flags(sim)
    _add_format_flag(sim)
    sim.set_defaults(func=_cmd_simulate)

    srv = commands.add_parser("serve", help="start the HTTP service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8765)
    srv.add_argument("--corpus", help="corpus file to preload")
    srv.add_argument("--verbose", action="store_true")
    srv.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _USER_ERRORS as exc:
        print(_format_error(exc), file=sys.stderr)
        return 2
    except _DATA_ERRORS as exc:
        print(_format_error(exc), file=sys.stderr)
        return 3
    except KeyboardInterrupt:
        return 130
    except Exception as exc:  # noqa: BLE001  keep the contract: 4 = internal
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
