"""Core data model: time spans, tracks, events, and the columnar event table."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

Timestamp = int  # integer nanoseconds since trace origin

CATEGORICAL = "categorical"
NUMERIC = "numeric"


class ModelError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class TimeSpan:
    """Half-open interval [begin, end) in integer nanoseconds."""

    begin: int
    end: int

    def __post_init__(self):
        if self.begin < 0:
            raise ModelError(f"span begin must be >= 0, got {self.begin}")
        if self.end < self.begin:
            raise ModelError(f"span end {self.end} precedes begin {self.begin}")

    @property
    def length(self) -> int:
        return self.end - self.begin

    @property
    def is_empty(self) -> bool:
        return self.end == self.begin

    def contains_point(self, t: int) -> bool:
        return self.begin <= t < self.end

    def hull(self, other: "TimeSpan") -> "TimeSpan":
        return TimeSpan(min(self.begin, other.begin), max(self.end, other.end))


def spans_overlap(a: TimeSpan, b: TimeSpan) -> bool:
    """True when the half-open intervals share at least one instant.

    Empty spans have no instants and therefore overlap nothing, including
    spans that contain their begin timestamp.
    """
    return max(a.begin, b.begin) < min(a.end, b.end)


def event_visible(enter: int, leave: int, window: TimeSpan) -> bool:
    """Visibility of an event record inside a query window.

    Durational events use plain interval overlap.  Zero-duration events are
    instants: they are visible when the window contains their timestamp, so
    they are never silently dropped at any zoom level.
    """
    if leave > enter:
        return max(enter, window.begin) < min(leave, window.end)
    return window.begin <= enter < window.end


@dataclass(frozen=True, slots=True)
class TrackId:
    index: int
    label: str


@dataclass(frozen=True)
class Event:
    """One durational record on a track.  ``track`` is the track index."""

    id: int
    track: int
    enter: int
    leave: int
    attrs: Mapping[str, str]

    def __post_init__(self):
        if self.leave < self.enter:
            raise ModelError(
                f"event {self.id}: leave {self.leave} precedes enter {self.enter}"
            )


def event_duration(e: Event) -> int:
    return e.leave - e.enter


@dataclass
class Dataset:
    name: str
    tracks: list[TrackId]
    events: int
    time_extent: TimeSpan
    attr_schema: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for attr, kind in self.attr_schema.items():
            if kind not in (CATEGORICAL, NUMERIC):
                raise ModelError(f"attribute {attr!r}: unknown kind {kind!r}")

    @property
    def track_count(self) -> int:
        return len(self.tracks)


def _parse_numeric(attr: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ModelError(f"attribute {attr!r}: {raw!r} is not a decimal string") from None


class EventTable:
    """Column-oriented event storage.

    Events live in parallel numpy arrays; categorical attribute values are
    dictionary-encoded per attribute (code -1 means the attribute is absent),
    numeric attributes are float64 with NaN for absent.  All index structures
    and baselines operate on these columns rather than per-event objects.
    """

    def __init__(
        self,
        ids: np.ndarray,
        track: np.ndarray,
        enter: np.ndarray,
        leave: np.ndarray,
        cat_codes: dict[str, np.ndarray],
        cat_vocab: dict[str, list[str]],
        num_values: dict[str, np.ndarray],
    ):
        n = len(ids)
        for name, arr in (("track", track), ("enter", enter), ("leave", leave)):
            if len(arr) != n:
                raise ModelError(f"column {name} length {len(arr)} != {n}")
        self.ids = ids
        self.track = track
        self.enter = enter
        self.leave = leave
        self.cat_codes = cat_codes
        self.cat_vocab = cat_vocab
        self.num_values = num_values

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def attr_schema(self) -> dict[str, str]:
        schema = {name: CATEGORICAL for name in self.cat_codes}
        schema.update({name: NUMERIC for name in self.num_values})
        return schema

    @classmethod
    def from_records(
        cls,
        records: Iterable[tuple[int, int, int, Mapping[str, str]]],
        attr_schema: Mapping[str, str],
    ) -> "EventTable":
        """Build from (track, enter, leave, attrs) tuples; ids are assigned
        in input order."""
        tracks: list[int] = []
        enters: list[int] = []
        leaves: list[int] = []
        cat_names = [a for a, k in attr_schema.items() if k == CATEGORICAL]
        num_names = [a for a, k in attr_schema.items() if k == NUMERIC]
        cat_raw: dict[str, list[int]] = {a: [] for a in cat_names}
        vocab_index: dict[str, dict[str, int]] = {a: {} for a in cat_names}
        num_raw: dict[str, list[float]] = {a: [] for a in num_names}

        for track, enter, leave, attrs in records:
            if enter < 0:
                raise ModelError(f"event: negative enter timestamp {enter}")
            if leave < enter:
                raise ModelError(f"event: leave {leave} precedes enter {enter}")
            tracks.append(track)
            enters.append(enter)
            leaves.append(leave)
            for a in cat_names:
                raw = attrs.get(a)
                if raw is None:
                    cat_raw[a].append(-1)
                else:
                    idx = vocab_index[a]
                    code = idx.setdefault(raw, len(idx))
                    cat_raw[a].append(code)
            for a in num_names:
                raw = attrs.get(a)
                num_raw[a].append(np.nan if raw is None else _parse_numeric(a, raw))

        n = len(tracks)
        return cls(
            ids=np.arange(n, dtype=np.int64),
            track=np.asarray(tracks, dtype=np.int32),
            enter=np.asarray(enters, dtype=np.int64),
            leave=np.asarray(leaves, dtype=np.int64),
            cat_codes={a: np.asarray(cat_raw[a], dtype=np.int32) for a in cat_names},
            cat_vocab={a: list(vocab_index[a]) for a in cat_names},
            num_values={a: np.asarray(num_raw[a], dtype=np.float64) for a in num_names},
        )

    def event(self, row: int) -> Event:
        attrs: dict[str, str] = {}
        for a, codes in self.cat_codes.items():
            c = int(codes[row])
            if c >= 0:
                attrs[a] = self.cat_vocab[a][c]
        for a, vals in self.num_values.items():
            v = vals[row]
            if not np.isnan(v):
                attrs[a] = repr(float(v))
        return Event(
            id=int(self.ids[row]),
            track=int(self.track[row]),
            enter=int(self.enter[row]),
            leave=int(self.leave[row]),
            attrs=attrs,
        )

    def iter_events(self) -> Iterator[Event]:
        for row in range(len(self)):
            yield self.event(row)

    def time_extent(self) -> TimeSpan:
        if len(self) == 0:
            return TimeSpan(0, 0)
        return TimeSpan(int(self.enter.min()), int(self.leave.max()))

    def track_count(self) -> int:
        if len(self) == 0:
            return 0
        return int(self.track.max()) + 1

    def sorted_by_track_time(self) -> "EventTable":
        """Stable sort by (track, enter, leave, id); builders start here."""
        order = np.lexsort((self.ids, self.leave, self.enter, self.track))
        return self.take(order)

    def take(self, rows: np.ndarray) -> "EventTable":
        return EventTable(
            ids=self.ids[rows],
            track=self.track[rows],
            enter=self.enter[rows],
            leave=self.leave[rows],
            cat_codes={a: c[rows] for a, c in self.cat_codes.items()},
            cat_vocab={a: list(v) for a, v in self.cat_vocab.items()},
            num_values={a: v[rows] for a, v in self.num_values.items()},
        )

    def track_slices(self) -> dict[int, tuple[int, int]]:
        """Row ranges per track; only valid on a (track, time)-sorted table."""
        out: dict[int, tuple[int, int]] = {}
        if len(self) == 0:
            return out
        tr = self.track
        bounds = np.flatnonzero(np.diff(tr)) + 1
        starts = np.concatenate(([0], bounds))
        ends = np.concatenate((bounds, [len(tr)]))
        for s, e in zip(starts, ends):
            out[int(tr[s])] = (int(s), int(e))
        return out

    def attr_value(self, row: int, attr: str) -> str | None:
        if attr in self.cat_codes:
            c = int(self.cat_codes[attr][row])
            return None if c < 0 else self.cat_vocab[attr][c]
        if attr in self.num_values:
            v = self.num_values[attr][row]
            return None if np.isnan(v) else repr(float(v))
        return None


def default_tracks(count: int, labels: Sequence[str] | None = None) -> list[TrackId]:
    if labels is not None:
        return [TrackId(i, lab) for i, lab in enumerate(labels)]
    width = max(3, len(str(max(count - 1, 0))))
    return [TrackId(i, f"track_{i:0{width}d}") for i in range(count)]
