"""The fidelity knob in action: sweep pixel_window over one dataset and watch
fetch time, payload size, and similarity move together.

Run from the repository root:

    python3 demos/fidelity_sweep.py [--events N] [--csv OUT]

Larger pixel windows let one summary span more columns, so answers shrink
and arrive faster while the raster drifts from ground truth.
"""
from __future__ import annotations

import argparse
import statistics
from pathlib import Path

from tracksum import SynthSpec, default_extent, generate_synthetic
from tracksum.bench import RANGE, generate_workload, run_benchmark, write_csv

CONFIGS = ["eseman-1dkdt", "eseman-agg", "eseman-kdt"]
WINDOWS = (1, 2, 4, 8, 16)
CANVAS = 1200


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--events", type=int, default=200_000)
    ap.add_argument("--tracks", type=int, default=6)
    ap.add_argument("--csv", type=Path, default=None,
                    help="also write raw per-query measurements here")
    args = ap.parse_args()

    spec = SynthSpec(tracks=args.tracks, events=args.events, dist="sparse",
                     seed=11, time_extent=default_extent(args.events))
    dataset, table = generate_synthetic(spec)
    workload = generate_workload(dataset, table, RANGE, seed=5, count=10)
    print(f"dataset: {dataset.name}, {len(workload.spans)} seeded queries, "
          f"canvas {CANVAS} px\n")

    all_rows = []
    header = f"{'config':<14} {'pw':>3} {'med_ms':>8} {'slices':>8} {'bytes':>10} {'ssim':>8}"
    print(header)
    print("-" * len(header))
    for pw in WINDOWS:
        rows = run_benchmark(dataset, table, workload, CONFIGS,
                             pixel_window=pw, canvas=CANVAS)
        all_rows.extend(rows)
        for cfg in CONFIGS:
            ok = [m for m in rows if m.config == cfg and m.status == "ok"]
            med_ms = statistics.median(m.mean_fetch_ms for m in ok)
            slices = statistics.median(m.slices for m in ok)
            nbytes = statistics.median(m.bytes for m in ok)
            sim = min(m.ssim for m in ok)
            print(f"{cfg:<14} {pw:>3} {med_ms:>8.2f} {slices:>8.0f} "
                  f"{nbytes:>10.0f} {sim:>8.4f}")
        print()

    if args.csv is not None:
        write_csv(all_rows, args.csv)
        print(f"wrote {len(all_rows)} measurements to {args.csv}")


if __name__ == "__main__":
    main()
