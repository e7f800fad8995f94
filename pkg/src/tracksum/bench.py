"""Benchmark harness: seeded workloads, warmup/measure repetitions, fetch
time and SSIM reporting.

Protocol per (config, query): 20 repetitions of the same fetch, the first 10
unmeasured warmups, the reported mean covering exactly repetitions 11-20.
Every config sees byte-identical query parameters.  SSIM is computed once
per (config, query) against the ground-truth raster of the events the naive
scan returns.  A config failure (memory exhaustion, resolution error) is
recorded as a failed cell and the run continues.

The fetch of every config covers query evaluation plus wire serialization,
so timings compare end-to-end backend work.  ``slices`` counts the records
each config puts on the wire (slices, event rows, M4 rows, or SAT cells).
"""
from __future__ import annotations

import csv
import json
import random
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import psutil

from . import baselines
from .hier import KIND_1D, KIND_2D, KIND_AGG, build_index
from .model import CATEGORICAL, Dataset, EventTable, ModelError, TimeSpan, event_visible
from .query import RangeQuery, handle_from_index, range_query
from .raster import (
    DEFAULT_WIDTH,
    ROW_GAP,
    ROW_HEIGHT,
    RasterGrid,
    grid_height,
    rasterize_events,
    rasterize_slices,
    ssim,
)

CONFIG_NAMES = ("naive", "sat", "reservoir", "m4", "eseman-1dkdt", "eseman-kdt", "eseman-agg")
RANGE = "range"
CONDITIONAL = "conditional"
WARMUP_REPS = 10
MEASURED_REPS = 10
INTERACTIVITY_THRESHOLD_MS = 100.0
_SAT_BIN_CAP = 1 << 18
_RESERVOIR_SEED = 100  # fixed sampling seed, independent of the workload seed


class BenchError(ModelError):
    pass


@dataclass(frozen=True)
class Workload:
    dataset: str
    kind: str
    spans: tuple[TimeSpan, ...]
    predicate: tuple[str, str] | None
    seed: int


def _spans_disjoint(spans: list[TimeSpan]) -> bool:
    ordered = sorted(spans, key=lambda s: s.begin)
    return all(a.end <= b.begin for a, b in zip(ordered, ordered[1:]))


def _value_in_all_spans(table: EventTable, mask: np.ndarray, spans: list[TimeSpan]) -> bool:
    enter = table.enter[mask]
    leave = table.leave[mask]
    for span in spans:
        B, E = span.begin, span.end
        vis = ((enter < E) & (leave > B)) | ((enter == leave) & (enter >= B) & (enter < E))
        if not vis.any():
            return False
    return True


def generate_workload(
    dataset: Dataset,
    table: EventTable,
    kind: str,
    seed: int,
    count: int = 20,
) -> Workload:
    """Seeded workload: ``count`` pairwise-disjoint time spans within the
    dataset extent; for conditional workloads also a categorical predicate
    matched by at least one event in every span."""
    if kind not in (RANGE, CONDITIONAL):
        raise BenchError(f"workload kind must be {RANGE!r} or {CONDITIONAL!r}")
    extent = dataset.time_extent
    if extent.length < count * 4:
        raise BenchError(
            f"dataset extent {extent.length} ns cannot fit {count} disjoint spans"
        )
    rng = random.Random(seed)
    cat_attrs = [a for a, k in dataset.attr_schema.items() if k == CATEGORICAL]
    if kind == CONDITIONAL and not cat_attrs:
        raise BenchError("conditional workload needs a categorical attribute")

    for attempt in range(40):
        spans: list[TimeSpan] = []
        failures = 0
        while len(spans) < count and failures < 500:
            frac = rng.randint(32, 96)
            length = max(2, extent.length // frac)
            begin = rng.randint(extent.begin, extent.end - length)
            candidate = TimeSpan(begin, begin + length)
            if _spans_disjoint(spans + [candidate]):
                spans.append(candidate)
            else:
                failures += 1
        if len(spans) < count:
            continue
        spans.sort(key=lambda s: s.begin)
        if kind == RANGE:
            return Workload(dataset.name, kind, tuple(spans), None, seed)
        # pick an attribute value present in every span
        attrs = list(cat_attrs)
        rng.shuffle(attrs)
        for attr in attrs:
            codes = table.cat_codes[attr]
            vocab = table.cat_vocab[attr]
            order = np.argsort(-np.bincount(codes[codes >= 0], minlength=len(vocab)))
            for code in order.tolist():
                if _value_in_all_spans(table, codes == code, spans):
                    return Workload(dataset.name, kind, tuple(spans), (attr, vocab[code]), seed)
    raise BenchError(
        f"could not generate a {kind} workload for {dataset.name!r} "
        f"(seed {seed}): no span set with a value present in every span"
    )


# --- configuration runners ------------------------------------------------------


class _EsemanRunner:
    def __init__(self, dataset: Dataset, table: EventTable, kind: str):
        self.kind = kind
        self.handle = handle_from_index(dataset, build_index(table, kind))
        self.track_hi = dataset.track_count - 1

    def fetch(self, span: TimeSpan, predicate, canvas: int, pw: int):
        attr, value = predicate if predicate else (None, None)
        q = RangeQuery(
            window=span, track_lo=0, track_hi=self.track_hi,
            canvas_px=canvas, pixel_window=pw, attr=attr, value=value,
        )
        res = range_query(self.handle, q)
        return res.slices, res.stats.bytes_returned, res.stats.slices_returned

    def raster(self, payload, span, track_hi, width) -> RasterGrid:
        return rasterize_slices(payload, span, 0, track_hi, width)


class _NaiveRunner:
    def __init__(self, dataset: Dataset, table: EventTable):
        self.table = table
        self.track_hi = dataset.track_count - 1
        self.mask_cache: dict[tuple[str, str], np.ndarray] = {}

    def _mask(self, predicate):
        if predicate is None:
            return None
        if predicate not in self.mask_cache:
            self.mask_cache[predicate] = baselines.attr_mask(self.table, *predicate)
        return self.mask_cache[predicate]

    def rows(self, span: TimeSpan, predicate) -> np.ndarray:
        return baselines.naive_query(self.table, span, 0, self.track_hi, self._mask(predicate))

    def fetch(self, span, predicate, canvas, pw):
        rows = self.rows(span, predicate)
        payload = np.stack(
            (self.table.enter[rows], self.table.leave[rows], self.table.track[rows]), axis=1
        ).tolist()
        wire = json.dumps(payload, separators=(",", ":")).encode()
        return rows, len(wire), len(rows)

    def raster(self, payload, span, track_hi, width) -> RasterGrid:
        return rasterize_events(self.table.take(payload), span, 0, track_hi, width)


class _ReservoirRunner(_NaiveRunner):
    def fetch(self, span, predicate, canvas, pw):
        rows = self.rows(span, predicate)
        sampled_parts = []
        track = self.table.track[rows]
        for tr in np.unique(track):
            sampled_parts.append(
                baselines.reservoir_query(rows[track == tr], canvas, _RESERVOIR_SEED)
            )
        sampled = (
            np.concatenate(sampled_parts) if sampled_parts else rows[:0]
        )
        payload = np.stack(
            (self.table.enter[sampled], self.table.leave[sampled], self.table.track[sampled]),
            axis=1,
        ).tolist()
        wire = json.dumps(payload, separators=(",", ":")).encode()
        return sampled, len(wire), len(sampled)


class _SatRunner:
    def __init__(self, dataset: Dataset, table: EventTable, workload: Workload, canvas: int):
        self.track_hi = dataset.track_count - 1
        extent = dataset.time_extent
        min_len = min(s.length for s in workload.spans)
        needed = -(-extent.length * canvas // max(min_len, 1))
        bins = int(min(max(canvas, needed), _SAT_BIN_CAP))
        mask = None
        if workload.predicate is not None:
            mask = baselines.attr_mask(table, *workload.predicate)
        self.table = baselines.BinnedTable.build(table, bins, extent, mask)

    def fetch(self, span, predicate, canvas, pw):
        counts = baselines.sat_query(self.table, span, 0, self.track_hi, canvas)
        payload = {str(tr): c.tolist() for tr, c in counts.items()}
        wire = json.dumps(payload, separators=(",", ":")).encode()
        return counts, len(wire), sum(len(c) for c in counts.values())

    def raster(self, payload, span, track_hi, width) -> RasterGrid:
        grid = RasterGrid(
            np.zeros((grid_height(track_hi + 1), width), dtype=np.float64), 0, track_hi
        )
        for tr, counts in payload.items():
            occ = np.asarray(counts) > 0
            if occ.any():
                top = tr * (ROW_HEIGHT + ROW_GAP)
                grid.cells[top : top + ROW_HEIGHT][:, occ] = 1.0
        return grid


class _M4Runner(_NaiveRunner):
    def fetch(self, span, predicate, canvas, pw):
        rows = self.rows(span, predicate)
        track = self.table.track[rows]
        per_track = {}
        records = 0
        for tr in np.unique(track):
            sel = rows[track == tr]
            k, at, ct = baselines.m4_query(
                self.table.enter[sel], self.table.leave[sel], span, canvas
            )
            per_track[int(tr)] = (k, at, ct)
            records += len(k)
        wire_rows = []
        for tr, (k, at, ct) in sorted(per_track.items()):
            wire_rows.extend(
                [tr, int(a), int(b), int(c)] for a, b, c in zip(k.tolist(), at.tolist(), ct.tolist())
            )
        wire = json.dumps(wire_rows, separators=(",", ":")).encode()
        return per_track, len(wire), records

    def raster(self, payload, span, track_hi, width) -> RasterGrid:
        grid = RasterGrid(
            np.zeros((grid_height(track_hi + 1), width), dtype=np.float64), 0, track_hi
        )
        B, E, L, W = span.begin, span.end, span.length, width
        for tr, (k, at, ct) in payload.items():
            bars, marks = baselines.m4_bars(at, ct)
            occ = np.zeros(W, dtype=bool)
            for s, t in bars:
                sb, se = max(s, B), min(t, E)
                if se > sb:
                    occ[(sb - B) * W // L : ((se - B) * W - 1) // L + 1] = True
                elif B <= s < E:
                    occ[(s - B) * W // L] = True
            for m in marks:
                if B <= m < E:
                    occ[(m - B) * W // L] = True
            if occ.any():
                top = tr * (ROW_HEIGHT + ROW_GAP)
                grid.cells[top : top + ROW_HEIGHT][:, occ] = 1.0
        return grid


def _make_runner(name: str, dataset, table, workload, canvas):
    if name == "naive":
        return _NaiveRunner(dataset, table)
    if name == "reservoir":
        return _ReservoirRunner(dataset, table)
    if name == "sat":
        return _SatRunner(dataset, table, workload, canvas)
    if name == "m4":
        return _M4Runner(dataset, table)
    if name == "eseman-1dkdt":
        return _EsemanRunner(dataset, table, KIND_1D)
    if name == "eseman-kdt":
        return _EsemanRunner(dataset, table, KIND_2D)
    if name == "eseman-agg":
        return _EsemanRunner(dataset, table, KIND_AGG)
    raise BenchError(f"unknown config {name!r}; choose from {CONFIG_NAMES}")


# --- measurement ---------------------------------------------------------------


@dataclass
class Measurement:
    dataset: str
    config: str
    query_id: int
    kind: str
    pixel_window: int
    times_ns: list[int] = field(default_factory=list)
    mean_fetch_ms: float = float("nan")
    ssim: float = float("nan")
    slices: int = 0
    bytes: int = 0
    status: str = "ok"
    memory_bytes: int = 0


def _ground_truth_raster(table, span, track_hi, width, predicate):
    mask = None
    if predicate is not None:
        mask = baselines.attr_mask(table, *predicate)
        sub = table.take(np.flatnonzero(mask))
    else:
        sub = table
    return rasterize_events(sub, span, 0, track_hi, width)


def run_benchmark(
    dataset: Dataset,
    table: EventTable,
    workload: Workload,
    configs: list[str],
    pixel_window: int = 1,
    canvas: int = DEFAULT_WIDTH,
    warmup: int = WARMUP_REPS,
    measured: int = MEASURED_REPS,
) -> list[Measurement]:
    for name in configs:
        if name not in CONFIG_NAMES:
            raise BenchError(f"unknown config {name!r}; choose from {CONFIG_NAMES}")
    track_hi = dataset.track_count - 1
    truth = [
        _ground_truth_raster(table, span, track_hi, canvas, workload.predicate)
        for span in workload.spans
    ]
    out: list[Measurement] = []
    proc = psutil.Process()
    for name in configs:
        rows: list[Measurement] = []
        try:
            runner = _make_runner(name, dataset, table, workload, canvas)
        except Exception as exc:  # config-level failure: every cell fails
            for qid in range(len(workload.spans)):
                out.append(
                    Measurement(
                        dataset=dataset.name, config=name, query_id=qid,
                        kind=workload.kind, pixel_window=pixel_window,
                        status=f"error:{type(exc).__name__}",
                    )
                )
            continue
        for qid, span in enumerate(workload.spans):
            m = Measurement(
                dataset=dataset.name, config=name, query_id=qid,
                kind=workload.kind, pixel_window=pixel_window,
            )
            try:
                payload = None
                for _ in range(warmup + measured):
                    t0 = time.perf_counter_ns()
                    payload, nbytes, nslices = runner.fetch(
                        span, workload.predicate, canvas, pixel_window
                    )
                    m.times_ns.append(time.perf_counter_ns() - t0)
                m.bytes = nbytes
                m.slices = nslices
                m.mean_fetch_ms = statistics.mean(m.times_ns[warmup:]) / 1e6
                grid = runner.raster(payload, span, track_hi, canvas)
                m.ssim = ssim(grid, truth[qid])
            except Exception as exc:
                m.status = f"error:{type(exc).__name__}"
                m.times_ns = []
                m.mean_fetch_ms = float("nan")
            rows.append(m)
        mem = proc.memory_info().rss
        for m in rows:
            m.memory_bytes = mem
        out.extend(rows)
    return out


CSV_COLUMNS = ["dataset", "config", "query_id", "kind", "pixel_window",
               "mean_fetch_ms", "ssim", "slices", "bytes", "status"]


def write_csv(measurements: list[Measurement], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for m in measurements:
            w.writerow([
                m.dataset, m.config, m.query_id, m.kind, m.pixel_window,
                f"{m.mean_fetch_ms:.3f}", f"{m.ssim:.6f}", m.slices, m.bytes, m.status,
            ])


def report(measurements: list[Measurement]) -> str:
    """Per-dataset summary: mean fetch time and 1-SSIM per config, with a
    flag on any cell whose mean exceeds the interactivity threshold."""
    by_key: dict[tuple[str, str], list[Measurement]] = {}
    for m in measurements:
        by_key.setdefault((m.dataset, m.config), []).append(m)
    lines = []
    lines.append(f"{'dataset':<28} {'config':<14} {'mean_ms':>10} {'1-ssim':>10} {'flags'}")
    for (ds, cfg), ms in sorted(by_key.items()):
        ok = [m for m in ms if m.status == "ok"]
        failed = len(ms) - len(ok)
        if ok:
            mean_ms = statistics.mean(m.mean_fetch_ms for m in ok)
            dissim = statistics.mean(1.0 - m.ssim for m in ok)
            flags = []
            over = sum(1 for m in ok if m.mean_fetch_ms > INTERACTIVITY_THRESHOLD_MS)
            if over:
                flags.append(f"{over} queries over {INTERACTIVITY_THRESHOLD_MS:.0f} ms")
            if failed:
                flags.append(f"{failed} failed")
            lines.append(
                f"{ds:<28} {cfg:<14} {mean_ms:>10.2f} {dissim:>10.6f} {'; '.join(flags)}"
            )
        else:
            lines.append(f"{ds:<28} {cfg:<14} {'-':>10} {'-':>10} all {len(ms)} failed")
    return "\n".join(lines)
