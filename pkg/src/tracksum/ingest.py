"""Trace file ingestion: line-delimited JSON records in, event tables out.

A trace file carries one JSON object per line:

    {"track": "worker_3", "enter": 1200, "leave": 1450, "attrs": {"function": "dgemm"}}

``enter``/``leave`` are integer nanoseconds, ``attrs`` maps attribute names to
string values.  Track indices are assigned by first appearance order of the
track label.  Ingested datasets are persisted in a compact internal format
(`events.npz` + `dataset.json`) under the store root so indexes and the query
server can reload them without reparsing.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping

import numpy as np

from .model import (
    CATEGORICAL,
    NUMERIC,
    Dataset,
    EventTable,
    ModelError,
    TimeSpan,
    TrackId,
    default_tracks,
)


class IngestError(ValueError):
    pass


@dataclass(frozen=True)
class TraceRecord:
    track: str
    enter: int
    leave: int
    attrs: Mapping[str, str]


def parse_trace_line(line: str, lineno: int = 0) -> TraceRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise IngestError(f"line {lineno}: invalid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise IngestError(f"line {lineno}: expected an object, got {type(obj).__name__}")
    try:
        track = obj["track"]
        enter = obj["enter"]
        leave = obj["leave"]
    except KeyError as exc:
        raise IngestError(f"line {lineno}: missing field {exc.args[0]!r}") from None
    if not isinstance(track, str):
        raise IngestError(f"line {lineno}: track must be a string")
    if not isinstance(enter, int) or isinstance(enter, bool):
        raise IngestError(f"line {lineno}: enter must be an integer")
    if not isinstance(leave, int) or isinstance(leave, bool):
        raise IngestError(f"line {lineno}: leave must be an integer")
    if enter < 0:
        raise IngestError(f"line {lineno}: enter must be nonnegative, got {enter}")
    if leave < enter:
        raise IngestError(f"line {lineno}: leave {leave} precedes enter {enter}")
    attrs = obj.get("attrs", {})
    if not isinstance(attrs, dict):
        raise IngestError(f"line {lineno}: attrs must be an object")
    for k, v in attrs.items():
        if not isinstance(k, str) or not isinstance(v, str):
            raise IngestError(f"line {lineno}: attrs must map strings to strings")
    return TraceRecord(track=track, enter=enter, leave=leave, attrs=attrs)


def parse_trace(lines: Iterable[str]) -> Iterator[TraceRecord]:
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        yield parse_trace_line(line, lineno)


def parse_schema(spec: str) -> dict[str, str]:
    """Parse a CLI schema string like ``function,duration:numeric``."""
    schema: dict[str, str] = {}
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            name, kind = part.split(":", 1)
            kind = kind.strip()
            if kind not in (CATEGORICAL, NUMERIC):
                raise IngestError(f"schema: unknown attribute kind {kind!r}")
        else:
            name, kind = part, CATEGORICAL
        schema[name.strip()] = kind
    return schema


def ingest_records(
    records: Iterable[TraceRecord],
    name: str,
    attr_schema: Mapping[str, str],
) -> tuple[Dataset, EventTable]:
    """Assemble a dataset and its columnar table from parsed records."""
    track_index: dict[str, int] = {}
    rows = []
    for rec in records:
        idx = track_index.setdefault(rec.track, len(track_index))
        rows.append((idx, rec.enter, rec.leave, rec.attrs))
    table = EventTable.from_records(rows, attr_schema)
    tracks = [TrackId(i, label) for label, i in track_index.items()]
    tracks.sort(key=lambda t: t.index)
    dataset = Dataset(
        name=name,
        tracks=tracks,
        events=len(table),
        time_extent=table.time_extent(),
        attr_schema=dict(attr_schema),
    )
    return dataset, table


def ingest_file(path: Path, name: str, attr_schema: Mapping[str, str]) -> tuple[Dataset, EventTable]:
    with open(path, "r", encoding="utf-8") as fh:
        return ingest_records(parse_trace(fh), name, attr_schema)


def write_trace(table: EventTable, tracks: list[TrackId], out: IO[str]) -> None:
    """Write a table back out as line-delimited JSON, one event per line."""
    labels = [t.label for t in tracks]
    for row in range(len(table)):
        ev = table.event(row)
        obj = {
            "track": labels[ev.track],
            "enter": ev.enter,
            "leave": ev.leave,
            "attrs": dict(ev.attrs),
        }
        out.write(json.dumps(obj, sort_keys=True, separators=(",", ":")))
        out.write("\n")


# --- internal persisted form -------------------------------------------------

_META_VERSION = 1


def dataset_dir(store_root: Path, name: str) -> Path:
    return Path(store_root) / name


def save_dataset(store_root: Path, dataset: Dataset, table: EventTable) -> Path:
    d = dataset_dir(store_root, dataset.name)
    d.mkdir(parents=True, exist_ok=True)
    arrays: dict[str, np.ndarray] = {
        "ids": table.ids,
        "track": table.track,
        "enter": table.enter,
        "leave": table.leave,
    }
    for a, codes in table.cat_codes.items():
        arrays[f"cat__{a}"] = codes
    for a, vals in table.num_values.items():
        arrays[f"num__{a}"] = vals
    np.savez_compressed(d / "events.npz", **arrays)
    meta = {
        "version": _META_VERSION,
        "name": dataset.name,
        "events": dataset.events,
        "time_extent": [dataset.time_extent.begin, dataset.time_extent.end],
        "tracks": [t.label for t in dataset.tracks],
        "attr_schema": dataset.attr_schema,
        "cat_vocab": table.cat_vocab,
    }
    tmp = d / "dataset.json.tmp"
    tmp.write_text(json.dumps(meta, indent=1, sort_keys=True))
    tmp.replace(d / "dataset.json")
    return d


def load_dataset(store_root: Path, name: str) -> tuple[Dataset, EventTable]:
    d = dataset_dir(store_root, name)
    meta_path = d / "dataset.json"
    if not meta_path.exists():
        raise IngestError(f"dataset {name!r} not found under {store_root}")
    meta = json.loads(meta_path.read_text())
    if meta.get("version") != _META_VERSION:
        raise IngestError(f"dataset {name!r}: unsupported format version {meta.get('version')}")
    with np.load(d / "events.npz") as z:
        cat_codes = {}
        num_values = {}
        for key in z.files:
            if key.startswith("cat__"):
                cat_codes[key[5:]] = z[key]
            elif key.startswith("num__"):
                num_values[key[5:]] = z[key]
        table = EventTable(
            ids=z["ids"],
            track=z["track"],
            enter=z["enter"],
            leave=z["leave"],
            cat_codes=cat_codes,
            cat_vocab={a: list(v) for a, v in meta["cat_vocab"].items()},
            num_values=num_values,
        )
    dataset = Dataset(
        name=meta["name"],
        tracks=default_tracks(len(meta["tracks"]), meta["tracks"]),
        events=int(meta["events"]),
        time_extent=TimeSpan(*meta["time_extent"]),
        attr_schema=dict(meta["attr_schema"]),
    )
    return dataset, table


def list_datasets(store_root: Path) -> list[str]:
    root = Path(store_root)
    if not root.exists():
        return []
    out = []
    for child in sorted(root.iterdir()):
        if (child / "dataset.json").exists():
            out.append(child.name)
    return out
