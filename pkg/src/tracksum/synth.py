"""Seeded synthetic trace generation with three density profiles.

Profiles shape the gap/duration ratio per track:

- ``dense``: gaps are at most a tenth of the neighboring duration, so events
  nearly tile the track.
- ``sparse``: gaps are at least ten times the duration, with a heavy
  (lognormal) tail so density varies along the track the way real traces do.
- ``clustered``: bursty groups of back-to-back events separated by gaps two
  to three orders of magnitude wider than a single event.

A small fraction of events (1%) is emitted with zero duration in every
profile so instant markers are always represented.  Output is fully
determined by (tracks, events, dist, seed, time_extent).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Dataset, EventTable, ModelError, TimeSpan, default_tracks

DISTRIBUTIONS = ("clustered", "sparse", "dense")

_KIND_VOCAB = [f"op_{i}" for i in range(8)]
_ZERO_FRACTION = 0.01


@dataclass(frozen=True)
class SynthSpec:
    tracks: int
    events: int
    dist: str
    seed: int
    time_extent: TimeSpan

    def __post_init__(self):
        if self.tracks < 1:
            raise ModelError("tracks must be >= 1")
        if self.events < self.tracks:
            raise ModelError("events must be >= tracks (every track gets at least one)")
        if self.dist not in DISTRIBUTIONS:
            raise ModelError(f"dist must be one of {DISTRIBUTIONS}, got {self.dist!r}")
        if self.time_extent.length <= 0:
            raise ModelError("time_extent must have positive length")


def default_extent(events: int) -> TimeSpan:
    return TimeSpan(0, events * 1024)


def _profile_durations_gaps(rng: np.random.Generator, n: int, dist: str):
    if dist == "dense":
        d = rng.integers(200, 2000, size=n)
        g = rng.integers(0, d // 10 + 1)
    elif dist == "sparse":
        d = rng.integers(20, 200, size=n)
        tail = np.exp(rng.normal(0.5, 2.0, size=n))
        g = d * 10 + np.floor(d * tail).astype(np.int64)
    else:  # clustered
        d = rng.integers(100, 1000, size=n)
        g = rng.integers(0, d // 5 + 1)
        # promote roughly every tenth gap to an inter-group chasm
        group_break = rng.random(size=n) < 0.1
        wide = d * rng.integers(100, 1000, size=n)
        g = np.where(group_break, wide, g)
    zero = rng.random(size=n) < _ZERO_FRACTION
    d = np.where(zero, 0, d)
    return d.astype(np.int64), g.astype(np.int64)


def _rescale(raw: np.ndarray, raw_end: int, extent: TimeSpan) -> np.ndarray:
    """Map raw offsets [0, raw_end] onto the extent, order preserving."""
    denom = max(raw_end, 1)
    if raw_end * extent.length < 2**62:
        return extent.begin + raw * extent.length // denom
    out = [extent.begin + int(t) * extent.length // denom for t in raw]
    return np.asarray(out, dtype=np.int64)


def generate_synthetic(spec: SynthSpec) -> tuple[Dataset, EventTable]:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    base = spec.events // spec.tracks
    remainder = spec.events % spec.tracks

    track_col = []
    enter_col = []
    leave_col = []
    for t in range(spec.tracks):
        n = base + (1 if t < remainder else 0)
        d, g = _profile_durations_gaps(rng, n, spec.dist)
        enter_raw = np.cumsum(g + np.concatenate(([0], d[:-1])))
        leave_raw = enter_raw + d
        raw_end = int(leave_raw[-1]) if n else 0
        enter = _rescale(enter_raw, raw_end, spec.time_extent)
        leave = _rescale(leave_raw, raw_end, spec.time_extent)
        track_col.append(np.full(n, t, dtype=np.int32))
        enter_col.append(enter)
        leave_col.append(leave)

    track = np.concatenate(track_col)
    enter = np.concatenate(enter_col).astype(np.int64)
    leave = np.concatenate(leave_col).astype(np.int64)
    n = len(track)

    kind_codes = rng.integers(0, len(_KIND_VOCAB), size=n).astype(np.int32)
    size_vals = ((leave - enter) * rng.integers(1, 6, size=n)).astype(np.float64)

    table = EventTable(
        ids=np.arange(n, dtype=np.int64),
        track=track,
        enter=enter,
        leave=leave,
        cat_codes={"kind": kind_codes},
        cat_vocab={"kind": list(_KIND_VOCAB)},
        num_values={"size": size_vals},
    )
    name = f"synth-{spec.dist}-t{spec.tracks}-e{spec.events}-s{spec.seed}"
    dataset = Dataset(
        name=name,
        tracks=default_tracks(spec.tracks),
        events=n,
        time_extent=spec.time_extent,
        attr_schema={"kind": "categorical", "size": "numeric"},
    )
    return dataset, table
