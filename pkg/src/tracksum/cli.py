"""Command line entry points: ingest, synth, index, bench run, serve."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bench as bench_mod
from . import ingest as ingest_mod
from . import synth as synth_mod
from .hier import KIND_1D, KIND_2D, KIND_AGG, build_index
from .model import TimeSpan
from .store import DEFAULT_MAP_SIZE, write_index_store

_BUILDERS = (KIND_1D, KIND_2D, KIND_AGG)
_DEFAULT_STORE = Path("./tracksum-store")


def _add_store_dir(p: argparse.ArgumentParser) -> None:
    p.add_argument("--store-dir", type=Path, default=_DEFAULT_STORE,
                   help="dataset/index store root (default ./tracksum-store)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tracksum",
                                 description="event sequence summarization toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load a line-delimited JSON trace into the store")
    p.add_argument("file", type=Path, help="trace file, one JSON event per line")
    p.add_argument("--name", required=True, help="dataset name")
    p.add_argument("--schema", default="",
                   help="attribute schema, e.g. 'op,size:numeric' (default: all categorical)")
    _add_store_dir(p)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--tracks", type=int, required=True)
    p.add_argument("--events", type=int, required=True)
    p.add_argument("--dist", choices=synth_mod.DISTRIBUTIONS, default="clustered")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--extent-end", type=int, default=None,
                   help="override the time extent end (ns)")
    p.add_argument("--out", type=Path, default=None,
                   help="write a .jsonl trace here instead of saving to the store")
    p.add_argument("--name", default=None, help="dataset name (default: derived)")
    _add_store_dir(p)

    p = sub.add_parser("index", help="build summarization trees for a stored dataset")
    p.add_argument("--name", required=True)
    p.add_argument("--builder", choices=_BUILDERS + ("all",), default="all")
    p.add_argument("--map-size", type=int, default=DEFAULT_MAP_SIZE)
    _add_store_dir(p)

    p = sub.add_parser("bench", help="benchmark harness")
    bsub = p.add_subparsers(dest="bench_command", required=True)
    p = bsub.add_parser("run", help="run the fetch/SSIM benchmark on a stored dataset")
    # ingest/index say --name; accept that spelling here too
    p.add_argument("--dataset", "--name", required=True)
    p.add_argument("--configs", default=",".join(bench_mod.CONFIG_NAMES),
                   help="comma separated subset of " + "|".join(bench_mod.CONFIG_NAMES))
    p.add_argument("--kind", choices=(bench_mod.RANGE, bench_mod.CONDITIONAL),
                   default=bench_mod.RANGE)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pixel-window", type=int, default=1)
    p.add_argument("--canvas", type=int, default=3672)
    p.add_argument("--queries", type=int, default=20)
    p.add_argument("--out", type=Path, required=True, help="results CSV path")
    _add_store_dir(p)

    p = sub.add_parser("serve", help="serve stored datasets over HTTP")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--session-mode", choices=("queue", "reject"), default="queue")
    _add_store_dir(p)

    return ap


def _cmd_ingest(args) -> int:
    schema = ingest_mod.parse_schema(args.schema)
    dataset, table = ingest_mod.ingest_file(args.file, args.name, schema)
    ingest_mod.save_dataset(args.store_dir, dataset, table)
    print(f"ingested {dataset.events} events on {dataset.track_count} tracks "
          f"as {dataset.name!r}")
    return 0


def _cmd_synth(args) -> int:
    if args.extent_end is not None:
        extent = TimeSpan(0, args.extent_end)
    else:
        extent = synth_mod.default_extent(args.events)
    spec = synth_mod.SynthSpec(tracks=args.tracks, events=args.events,
                               dist=args.dist, seed=args.seed, time_extent=extent)
    dataset, table = synth_mod.generate_synthetic(spec)
    if args.name:
        dataset = type(dataset)(name=args.name, tracks=dataset.tracks,
                                events=dataset.events,
                                time_extent=dataset.time_extent,
                                attr_schema=dataset.attr_schema)
    if args.out is not None:
        with open(args.out, "w", encoding="utf-8") as fh:
            ingest_mod.write_trace(table, dataset.tracks, fh)
        print(f"wrote {dataset.events} events to {args.out}")
    else:
        ingest_mod.save_dataset(args.store_dir, dataset, table)
        print(f"saved dataset {dataset.name!r} "
              f"({dataset.events} events, {dataset.track_count} tracks)")
    return 0


def _cmd_index(args) -> int:
    dataset, table = ingest_mod.load_dataset(args.store_dir, args.name)
    builders = _BUILDERS if args.builder == "all" else (args.builder,)
    for b in builders:
        index = build_index(table, b)
        write_index_store(args.store_dir, args.name, b, index, map_size=args.map_size)
        nodes = sum(t.size for t in index.trees.values())
        print(f"built {b}: {len(index.trees)} trees, {nodes} nodes")
    return 0


def _cmd_bench_run(args) -> int:
    dataset, table = ingest_mod.load_dataset(args.store_dir, args.dataset)
    configs = [c.strip() for c in args.configs.split(",") if c.strip()]
    workload = bench_mod.generate_workload(dataset, table, args.kind, args.seed,
                                           count=args.queries)
    measurements = bench_mod.run_benchmark(
        dataset, table, workload, configs,
        pixel_window=args.pixel_window, canvas=args.canvas,
    )
    bench_mod.write_csv(measurements, args.out)
    print(bench_mod.report(measurements))
    print(f"\nwrote {args.out}")
    return 0


def _cmd_serve(args) -> int:
    from .server import serve

    serve(args.store_dir, host=args.host, port=args.port,
          session_mode=args.session_mode)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "ingest":
            return _cmd_ingest(args)
        if args.command == "synth":
            return _cmd_synth(args)
        if args.command == "index":
            return _cmd_index(args)
        if args.command == "bench":
            return _cmd_bench_run(args)
        if args.command == "serve":
            return _cmd_serve(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
