"""Pixel-window-bounded traversal of summary trees.

A range query walks each relevant tree from the root, prunes nodes outside
the query window, and descends until a node's time span fits within the span
of one pixel window, at which point the node is emitted as a summarized
slice.  Leaves emit the original events exactly.  The termination test is
exact integer arithmetic: a node spanning ``s`` nanoseconds terminates when
``s * canvas_px <= window_length * pixel_window``, which is the same
comparison as ``s <= window_length * pixel_window / canvas_px`` without
rounding.

Each query runs against a per-session ``NodeCache``.  After the traversal the
cache retains exactly the nodes the traversal touched: nodes from earlier
queries that this one did not revisit are evicted, so cache contents always
mirror the most recent viewport.
"""
from __future__ import annotations

import json
import time
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .hier import (
    AttrSummary,
    DatasetIndex,
    KIND_2D,
    NodeKey,
    SummaryNode,
    TreeArrays,
)
from .model import NUMERIC, Dataset, ModelError, TimeSpan


class QueryError(ModelError):
    pass


class UnsupportedPredicateError(QueryError):
    pass


@dataclass(frozen=True)
class RangeQuery:
    window: TimeSpan
    track_lo: int
    track_hi: int
    canvas_px: int = 3672
    pixel_window: int = 1
    attr: str | None = None
    value: str | None = None

    def __post_init__(self):
        if not 0 <= self.track_lo <= self.track_hi:
            raise QueryError(f"invalid track range [{self.track_lo}, {self.track_hi}]")
        if self.canvas_px < 1:
            raise QueryError(f"canvas_px must be >= 1, got {self.canvas_px}")
        if self.pixel_window < 1:
            raise QueryError(f"pixel_window must be >= 1, got {self.pixel_window}")
        if (self.attr is None) != (self.value is None):
            raise QueryError("attr and value must be given together")


def pixel_window_span(q: RangeQuery) -> int:
    """Nanoseconds covered by one pixel window, rounded up."""
    return -(-q.window.length * q.pixel_window // q.canvas_px)


@dataclass(frozen=True, slots=True)
class SummarySlice:
    track_lo: int
    track_hi: int
    begin: int
    end: int
    count: int
    exact: bool
    event_id: int  # -1 for summarized slices
    end_mark: bool
    attrs: AttrSummary


@dataclass
class FetchStats:
    nodes_visited: int = 0
    cache_hits: int = 0
    cache_misses: int = 0
    slices_returned: int = 0
    bytes_returned: int = 0
    elapsed_ns: int = 0


class NodeCache:
    """Session cache over a node source.

    ``retain_exact`` implements the traversal-driven eviction policy: after a
    query the cache holds exactly the keys that traversal touched.
    """

    def __init__(self):
        self.nodes: dict[NodeKey, SummaryNode] = {}
        self.hits = 0
        self.misses = 0

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, key: NodeKey) -> bool:
        return key in self.nodes

    def retain_exact(self, keys: set[NodeKey]) -> None:
        if len(keys) != len(self.nodes):
            nodes = self.nodes
            self.nodes = {k: nodes[k] for k in keys}


class NodeSource(Protocol):
    def get(self, key: NodeKey) -> SummaryNode: ...

    def tree_ids(self) -> list[int]: ...


class InMemorySource:
    """Serves nodes straight from built TreeArrays."""

    def __init__(self, index: DatasetIndex):
        self._trees = index.trees

    def get(self, key: NodeKey) -> SummaryNode:
        tree = self._trees.get(key[0])
        if tree is None:
            raise KeyError(key)
        return tree.node(key[1])

    def tree_ids(self) -> list[int]:
        return sorted(self._trees)

    def arrays(self, tree_id: int) -> TreeArrays | None:
        return self._trees.get(tree_id)


def get_node(key: NodeKey, source: NodeSource, cache: NodeCache | None) -> SummaryNode:
    """Cache-consulting node fetch: hit in cache, else load and insert."""
    if cache is None:
        return source.get(key)
    node = cache.nodes.get(key)
    if node is not None:
        cache.hits += 1
        return node
    node = source.get(key)
    cache.nodes[key] = node
    cache.misses += 1
    return node


@dataclass
class QueryResult:
    slices: list[SummarySlice]
    stats: FetchStats
    wire: bytes


@dataclass
class QueryHandle:
    """A queryable dataset index: node source plus enough dataset metadata
    to route queries and validate predicates."""

    dataset: Dataset
    kind: str
    source: NodeSource
    tree_ids_sorted: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.tree_ids_sorted:
            self.tree_ids_sorted = self.source.tree_ids()


def handle_from_index(dataset: Dataset, index: DatasetIndex) -> QueryHandle:
    return QueryHandle(dataset=dataset, kind=index.kind, source=InMemorySource(index))


def _walk(
    tree_id: int,
    source: NodeSource,
    cache: NodeCache | None,
    touched: set[NodeKey],
    stats: FetchStats,
    wb: int,
    we: int,
    wlen: int,
    canvas: int,
    pw: int,
    track_lo: int,
    track_hi: int,
    check_tracks: bool,
    attr: str | None,
    value: str | None,
    out: list[SummarySlice],
) -> None:
    if cache is not None:
        cache_nodes = cache.nodes
    else:
        cache_nodes = None
    sget = source.get
    stack = [0]
    visited = 0
    hits = 0
    misses = 0
    while stack:
        pid = stack.pop()
        key = (tree_id, pid)
        node = None
        if cache_nodes is not None:
            node = cache_nodes.get(key)
        if node is None:
            node = sget(key)
            misses += 1
            if cache_nodes is not None:
                cache_nodes[key] = node
        else:
            hits += 1
        touched.add(key)
        visited += 1

        b = node.begin
        e = node.end
        if not (b < we and wb < e):
            # outside the window unless an instant marker sits exactly at
            # the hull end and that instant is inside the window
            if not (node.end_mark and wb <= e < we):
                continue
        if check_tracks and (node.track_lo > track_hi or node.track_hi < track_lo):
            continue
        if attr is not None:
            values = node.attrs.categorical.get(attr)
            if values is None or value not in values:
                continue

        leaf = node.leaf
        if leaf is not None:
            out.append(
                SummarySlice(
                    track_lo=leaf.track,
                    track_hi=leaf.track,
                    begin=leaf.enter,
                    end=leaf.leave,
                    count=1,
                    exact=True,
                    event_id=leaf.id,
                    end_mark=leaf.enter == leaf.leave,
                    attrs=node.attrs,
                )
            )
            continue
        if (e - b) * canvas <= wlen * pw:
            out.append(
                SummarySlice(
                    track_lo=node.track_lo,
                    track_hi=node.track_hi,
                    begin=b,
                    end=e,
                    count=node.count,
                    exact=False,
                    event_id=-1,
                    end_mark=node.end_mark,
                    attrs=node.attrs,
                )
            )
            continue
        stack.append(node.child_b)
        stack.append(node.child_a)

    stats.nodes_visited += visited
    stats.cache_hits += hits
    stats.cache_misses += misses
    if cache is not None:
        cache.hits += hits
        cache.misses += misses


def _walk_arrays(
    tree: TreeArrays,
    stats: FetchStats,
    wb: int,
    we: int,
    wlen: int,
    canvas: int,
    pw: int,
    track_lo: int,
    track_hi: int,
    check_tracks: bool,
    attr: str | None,
    value: str | None,
    out: list[SummarySlice],
) -> None:
    """Breadth-first cut over the column arrays.

    Emits exactly the slices the node walk would, in the same order: preorder
    ids ascend along a depth-first visit, so sorting the emitted ids restores
    it.  Used only when the caller asked for no cache retention; sources that
    cannot hand out their arrays fall back to the node walk.
    """
    masks = sets = None
    code = np.uint64(0)
    matchable = True
    if attr is not None:
        masks = tree.cat_masks.get(attr)
        if masks is not None:
            try:
                code = np.uint64(tree.cat_vocab[attr].index(value))
            except ValueError:
                masks = None
                matchable = False
        else:
            sets = tree.cat_sets.get(attr)
            matchable = sets is not None

    frontier = np.zeros(1, dtype=np.int32)
    visited = 0
    emitted: list[np.ndarray] = []
    while frontier.size:
        visited += frontier.size
        b = tree.begin[frontier]
        e = tree.end[frontier]
        keep = (b < we) & (wb < e)
        keep |= tree.end_mark[frontier] & (wb <= e) & (e < we)
        if check_tracks:
            keep &= tree.track_lo[frontier] <= track_hi
            keep &= tree.track_hi[frontier] >= track_lo
        if attr is not None:
            if masks is not None:
                keep &= (masks[frontier] >> code & np.uint64(1)).astype(bool)
            elif sets is not None:
                keep &= np.asarray([value in s for s in sets[frontier]], dtype=bool)
            elif not matchable:
                break
        frontier = frontier[keep]
        if not frontier.size:
            break
        emit = tree.leaf_row[frontier] >= 0
        emit |= (tree.end[frontier] - tree.begin[frontier]) * canvas <= wlen * pw
        if emit.any():
            emitted.append(frontier[emit])
        expand = frontier[~emit]
        frontier = np.concatenate((tree.child_a[expand], tree.child_b[expand]))

    if emitted:
        leaf_row = tree.leaf_row
        for pid in np.sort(np.concatenate(emitted)).tolist():
            attrs = tree.node_attrs(pid)
            if leaf_row[pid] >= 0:
                enter = int(tree.leaf_enter[pid])
                leave = int(tree.leaf_leave[pid])
                track = int(tree.leaf_track[pid])
                out.append(
                    SummarySlice(
                        track_lo=track,
                        track_hi=track,
                        begin=enter,
                        end=leave,
                        count=1,
                        exact=True,
                        event_id=int(tree.leaf_id[pid]),
                        end_mark=enter == leave,
                        attrs=attrs,
                    )
                )
            else:
                out.append(
                    SummarySlice(
                        track_lo=int(tree.track_lo[pid]),
                        track_hi=int(tree.track_hi[pid]),
                        begin=int(tree.begin[pid]),
                        end=int(tree.end[pid]),
                        count=int(tree.count[pid]),
                        exact=False,
                        event_id=-1,
                        end_mark=bool(tree.end_mark[pid]),
                        attrs=attrs,
                    )
                )
    stats.nodes_visited += visited
    stats.cache_misses += visited


def assemble_2d_results(slices: list[SummarySlice]) -> list[SummarySlice]:
    """Merge raw global-tree results into drawable slices.

    Exact slices carry original event bounds; segments of one split event all
    report the same id, so duplicates collapse to a single slice.  The result
    is ordered by (track, time).
    """
    seen: set[int] = set()
    merged: list[SummarySlice] = []
    for s in slices:
        if s.exact:
            if s.event_id in seen:
                continue
            seen.add(s.event_id)
        merged.append(s)
    merged.sort(key=lambda s: (s.track_lo, s.track_hi, s.begin, s.end, s.event_id))
    return merged


def slice_to_wire(s: SummarySlice) -> dict:
    obj: dict = {
        "track_lo": s.track_lo,
        "track_hi": s.track_hi,
        "begin": s.begin,
        "end": s.end,
        "count": s.count,
        "exact": s.exact,
        "end_mark": s.end_mark,
    }
    if s.exact:
        obj["id"] = s.event_id
    a = s.attrs
    if a.categorical or a.numeric:
        attrs: dict = {}
        if a.categorical:
            attrs["categorical"] = {k: sorted(v) for k, v in sorted(a.categorical.items())}
        if a.numeric:
            attrs["numeric"] = {
                k: {"min": v.min, "max": v.max, "mean": v.mean, "count": v.count}
                for k, v in sorted(a.numeric.items())
            }
        obj["attrs"] = attrs
    return obj


def serialize_slices(slices: list[SummarySlice]) -> bytes:
    return json.dumps([slice_to_wire(s) for s in slices], separators=(",", ":")).encode()


def range_query(handle: QueryHandle, q: RangeQuery, cache: NodeCache | None = None) -> QueryResult:
    """Run one query; returns slices ordered by (track, time) plus stats and
    the serialized wire payload."""
    t0 = time.perf_counter_ns()
    if q.attr is not None:
        kinds = handle.dataset.attr_schema
        if q.attr not in kinds:
            raise UnsupportedPredicateError(f"unknown attribute {q.attr!r}")
        if kinds[q.attr] == NUMERIC:
            raise UnsupportedPredicateError(
                f"attribute {q.attr!r} is numeric; conditional pruning uses "
                "categorical value sets only"
            )
    stats = FetchStats()
    touched: set[NodeKey] = set()
    out: list[SummarySlice] = []
    wb, we = q.window.begin, q.window.end
    wlen = we - wb
    # cache retention pins us to the node walk; otherwise sources that expose
    # their column arrays get the vectorized cut
    arrays_of = getattr(handle.source, "arrays", None) if cache is None else None
    if wlen > 0:
        if handle.kind == KIND_2D:
            if handle.tree_ids_sorted:
                tid = handle.tree_ids_sorted[0]
                tree = arrays_of(tid) if arrays_of is not None else None
                if tree is not None:
                    _walk_arrays(
                        tree, stats, wb, we, wlen, q.canvas_px, q.pixel_window,
                        q.track_lo, q.track_hi, True, q.attr, q.value, out,
                    )
                else:
                    _walk(
                        tid, handle.source, cache, touched, stats,
                        wb, we, wlen, q.canvas_px, q.pixel_window,
                        q.track_lo, q.track_hi, True, q.attr, q.value, out,
                    )
            out = assemble_2d_results(out)
        else:
            ids = handle.tree_ids_sorted
            lo = bisect_left(ids, q.track_lo)
            hi = bisect_right(ids, q.track_hi)
            for tree_id in ids[lo:hi]:
                tree = arrays_of(tree_id) if arrays_of is not None else None
                if tree is not None:
                    _walk_arrays(
                        tree, stats, wb, we, wlen, q.canvas_px, q.pixel_window,
                        0, 0, False, q.attr, q.value, out,
                    )
                else:
                    _walk(
                        tree_id, handle.source, cache, touched, stats,
                        wb, we, wlen, q.canvas_px, q.pixel_window,
                        0, 0, False, q.attr, q.value, out,
                    )
    if cache is not None:
        cache.retain_exact(touched)
    wire = serialize_slices(out)
    stats.slices_returned = len(out)
    stats.bytes_returned = len(wire)
    stats.elapsed_ns = time.perf_counter_ns() - t0
    return QueryResult(slices=out, stats=stats, wire=wire)


def conditional_query(
    handle: QueryHandle,
    q: RangeQuery,
    attr: str,
    value: str,
    cache: NodeCache | None = None,
) -> QueryResult:
    narrowed = RangeQuery(
        window=q.window,
        track_lo=q.track_lo,
        track_hi=q.track_hi,
        canvas_px=q.canvas_px,
        pixel_window=q.pixel_window,
        attr=attr,
        value=value,
    )
    return range_query(handle, narrowed, cache)
