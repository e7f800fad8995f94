"""HTTP query server.

Endpoints:

- ``GET /datasets``: descriptors for every dataset under the store root.
- ``GET /query``: windowed fetch against a stored index; responds with the
  slice payload plus fetch statistics.
- ``GET /raster``: ground-truth occupied pixel columns for a window,
  computed from the raw event table.  Lets clients verify their own
  rendering against the backend.

Status codes: 400 for invalid parameters (including begin >= end), 404 for
an unknown dataset, 422 for a predicate the index cannot serve.

Sessions: a ``session`` query parameter keys a server-side node cache that
persists across that session's requests.  Requests within one session are
serialized; concurrent sessions proceed independently.  With
``session_mode="reject"`` a request that would have to wait gets a 429
instead.  Requests without a session use a throwaway cache.
"""
from __future__ import annotations

import json
import threading
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from .baselines import attr_mask
from .hier import KIND_1D, KIND_2D, KIND_AGG
from .ingest import list_datasets, load_dataset
from .model import Dataset, EventTable, ModelError, TimeSpan
from .query import (
    NodeCache,
    QueryError,
    QueryHandle,
    RangeQuery,
    UnsupportedPredicateError,
    range_query,
)
from .raster import occupied_columns, rasterize_events
from .store import NodeStore, store_dir

BUILDERS = (KIND_1D, KIND_2D, KIND_AGG)
DEFAULT_BUILDER = KIND_1D


class _ApiError(Exception):
    def __init__(self, status: int, message: str):
        self.status = status
        self.message = message


def _error(status: int, message: str) -> Response:
    return Response(
        content=json.dumps({"error": message}),
        status_code=status,
        media_type="application/json",
    )


class _DatasetEntry:
    def __init__(self, root: Path, name: str):
        self.root = root
        self.name = name
        self.dataset: Dataset
        self.table: EventTable
        self.dataset, self.table = load_dataset(root, name)
        self._handles: dict[str, QueryHandle] = {}
        self._lock = threading.Lock()

    def builders(self) -> list[str]:
        found = []
        for b in BUILDERS:
            if (store_dir(self.root, self.name, b) / "manifest.json").exists():
                found.append(b)
        return found

    def handle(self, builder: str) -> QueryHandle:
        with self._lock:
            h = self._handles.get(builder)
            if h is None:
                d = store_dir(self.root, self.name, builder)
                if not (d / "manifest.json").exists():
                    raise _ApiError(400, f"no {builder!r} index for dataset {self.name!r}")
                store = NodeStore(d)
                h = QueryHandle(dataset=self.dataset, kind=builder, source=store)
                self._handles[builder] = h
            return h

    def descriptor(self) -> dict:
        ext = self.dataset.time_extent
        return {
            "name": self.name,
            "tracks": self.dataset.track_count,
            "events": self.dataset.events,
            "time_extent": {"begin": ext.begin, "end": ext.end},
            "builders": self.builders(),
            "attr_schema": dict(self.dataset.attr_schema),
        }


class _Sessions:
    def __init__(self, mode: str):
        if mode not in ("queue", "reject"):
            raise ValueError(f"session_mode must be 'queue' or 'reject', got {mode!r}")
        self.mode = mode
        self._lock = threading.Lock()
        self._entries: dict[str, tuple[threading.Lock, NodeCache]] = {}

    def acquire(self, session: str | None) -> tuple[threading.Lock | None, NodeCache]:
        if session is None:
            return None, NodeCache()
        with self._lock:
            entry = self._entries.get(session)
            if entry is None:
                entry = (threading.Lock(), NodeCache())
                self._entries[session] = entry
        lock, cache = entry
        if self.mode == "reject":
            if not lock.acquire(blocking=False):
                raise _ApiError(429, f"session {session!r} is busy")
        else:
            lock.acquire()
        return lock, cache


def _parse_int(params: dict, name: str, default: int | None = None) -> int:
    raw = params.get(name)
    if raw is None:
        if default is None:
            raise _ApiError(400, f"missing required parameter {name!r}")
        return default
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise _ApiError(400, f"parameter {name!r} must be an integer, got {raw!r}") from None


def create_app(store_root: Path | str, session_mode: str = "queue") -> FastAPI:
    root = Path(store_root)
    app = FastAPI(title="tracksum", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    entries: dict[str, _DatasetEntry] = {}
    registry_lock = threading.Lock()
    sessions = _Sessions(session_mode)
    app.state.store_root = root
    app.state.sessions = sessions

    def entry_for(name: str) -> _DatasetEntry:
        with registry_lock:
            e = entries.get(name)
            if e is None:
                if name not in list_datasets(root):
                    raise _ApiError(404, f"unknown dataset {name!r}")
                e = _DatasetEntry(root, name)
                entries[name] = e
            return e

    @app.get("/datasets")
    def datasets() -> Response:
        names = list_datasets(root)
        body = [entry_for(n).descriptor() for n in names]
        return Response(json.dumps(body), media_type="application/json")

    # FastAPI's signature-driven parsing would answer malformed integers with
    # its own 422; these endpoints parse by hand so invalid parameters are
    # uniformly a 400 and 422 stays reserved for unsupported predicates.

    @app.get("/query")
    def query(request: Request) -> Response:
        params = dict(request.query_params)
        try:
            name = params.get("dataset")
            if not name:
                raise _ApiError(400, "missing required parameter 'dataset'")
            e = entry_for(name)
            begin = _parse_int(params, "begin")
            end = _parse_int(params, "end")
            if begin >= end:
                raise _ApiError(400, f"begin ({begin}) must be less than end ({end})")
            track_lo = _parse_int(params, "track_lo", 0)
            track_hi = _parse_int(params, "track_hi", e.dataset.track_count - 1)
            canvas_px = _parse_int(params, "canvas_px", 3672)
            pixel_window = _parse_int(params, "pixel_window", 1)
            builder = params.get("builder", DEFAULT_BUILDER)
            if builder not in BUILDERS:
                raise _ApiError(400, f"unknown builder {builder!r}")
            attr = params.get("attr_key")
            value = params.get("attr_value")
            if (attr is None) != (value is None):
                raise _ApiError(400, "attr_key and attr_value must be given together")
            try:
                q = RangeQuery(
                    window=TimeSpan(begin, end),
                    track_lo=track_lo,
                    track_hi=track_hi,
                    canvas_px=canvas_px,
                    pixel_window=pixel_window,
                    attr=attr,
                    value=value,
                )
            except (QueryError, ModelError) as exc:
                raise _ApiError(400, str(exc)) from None
            handle = e.handle(builder)
            lock, cache = sessions.acquire(params.get("session"))
            try:
                try:
                    result = range_query(handle, q, cache)
                except UnsupportedPredicateError as exc:
                    raise _ApiError(422, str(exc)) from None
                except QueryError as exc:
                    raise _ApiError(400, str(exc)) from None
            finally:
                if lock is not None:
                    lock.release()
            stats = result.stats
            head = (
                b'{"slices":' + result.wire + b',"stats":{'
                b'"fetch_ns":%d,"nodes":%d,"hits":%d,"bytes":%d}}'
                % (stats.elapsed_ns, stats.nodes_visited, stats.cache_hits,
                   stats.bytes_returned)
            )
            return Response(head, media_type="application/json")
        except _ApiError as exc:
            return _error(exc.status, exc.message)

    @app.get("/raster")
    def raster(request: Request) -> Response:
        params = dict(request.query_params)
        try:
            name = params.get("dataset")
            if not name:
                raise _ApiError(400, "missing required parameter 'dataset'")
            e = entry_for(name)
            begin = _parse_int(params, "begin")
            end = _parse_int(params, "end")
            if begin >= end:
                raise _ApiError(400, f"begin ({begin}) must be less than end ({end})")
            track_lo = _parse_int(params, "track_lo", 0)
            track_hi = _parse_int(params, "track_hi", e.dataset.track_count - 1)
            canvas_px = _parse_int(params, "canvas_px", 3672)
            if not 0 <= track_lo <= track_hi:
                raise _ApiError(400, f"invalid track range [{track_lo}, {track_hi}]")
            if canvas_px <= 0:
                raise _ApiError(400, f"canvas_px must be positive, got {canvas_px}")
            attr = params.get("attr_key")
            value = params.get("attr_value")
            if (attr is None) != (value is None):
                raise _ApiError(400, "attr_key and attr_value must be given together")
            table = e.table
            if attr is not None:
                kind = e.dataset.attr_schema.get(attr)
                if kind is None:
                    raise _ApiError(422, f"unknown attribute {attr!r}")
                if kind != "categorical":
                    raise _ApiError(422, f"attribute {attr!r} does not support equality")
                table = table.take(np.flatnonzero(attr_mask(table, attr, value)))
            grid = rasterize_events(
                table, TimeSpan(begin, end), track_lo, track_hi, canvas_px
            )
            cols = occupied_columns(grid)
            body = {str(tr): c for tr, c in cols.items()}
            return Response(json.dumps(body), media_type="application/json")
        except _ApiError as exc:
            return _error(exc.status, exc.message)

    return app


def serve(store_root: Path | str, host: str = "127.0.0.1", port: int = 8787,
          session_mode: str = "queue") -> None:
    import uvicorn

    uvicorn.run(create_app(store_root, session_mode), host=host, port=port,
                log_level="warning")
