"""Hierarchical summarization trees over event tables.

Three builders produce trees whose nodes carry tight time hulls, track
bounds, event counts, and propagated attribute summaries:

- ``build_track_forest(kind="1dkdt")``: one balanced tree per track, splitting
  event counts fairly (the odd event goes to the right child) over events
  sorted by (enter, leave, id).
- ``build_track_forest(kind="agg")``: one tree per track from bottom-up
  single-linkage merging by temporal gap, so node boundaries follow the
  natural clustering of the data.
- ``build_global_tree`` (kind ``kdt``): a single tree over (time, track),
  alternating split axes starting with time.  Time splits cut at the midpoint
  of the node's tight span and slice events that straddle it into segments
  sharing the original event id; child hulls snap to their contents.  Track
  splits halve the track range with the extra track going to the top (lower
  indices).  Once a node covers a single track the builder switches to the
  fair count-splitting rule.

Node ids are preorder positions within their tree, so a child id is always
greater than its parent's, and bottom-up passes can simply iterate ids in
descending order.

Every node records whether a zero-duration event sits exactly at its hull
end (``end_mark``).  Hulls are half-open, so without the flag an instant
marker at the hull's end would be invisible to interval overlap tests.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .model import EventTable, ModelError

KIND_1D = "1dkdt"
KIND_AGG = "agg"
KIND_2D = "kdt"
TREE_KINDS = (KIND_1D, KIND_AGG, KIND_2D)

_MASK_VOCAB_LIMIT = 64


class BuildError(ModelError):
    pass


NodeKey = tuple[int, int]  # (tree_id, preorder_id)


@dataclass(frozen=True, slots=True)
class NumericSummary:
    min: float
    max: float
    mean: float
    count: int


@dataclass(frozen=True, slots=True)
class AttrSummary:
    categorical: dict[str, frozenset[str]]
    numeric: dict[str, NumericSummary]

    def __eq__(self, other):
        if not isinstance(other, AttrSummary):
            return NotImplemented
        return self.categorical == other.categorical and self.numeric == other.numeric


EMPTY_ATTRS = AttrSummary({}, {})


@dataclass(frozen=True, slots=True)
class LeafEvent:
    """Original event carried by a leaf.  For segment leaves of the global
    tree these are the bounds of the whole event, not the segment."""

    id: int
    track: int
    enter: int
    leave: int


@dataclass(frozen=True, slots=True)
class SummaryNode:
    key: NodeKey
    begin: int
    end: int
    track_lo: int
    track_hi: int
    count: int
    child_a: int  # preorder id, -1 when leaf
    child_b: int
    end_mark: bool
    leaf: LeafEvent | None
    attrs: AttrSummary


class TreeArrays:
    """Column-oriented storage for one built tree, indexed by preorder id."""

    def __init__(self, tree_id: int, kind: str, size: int):
        self.tree_id = tree_id
        self.kind = kind
        self.size = size
        self.begin = np.zeros(size, dtype=np.int64)
        self.end = np.zeros(size, dtype=np.int64)
        self.track_lo = np.zeros(size, dtype=np.int32)
        self.track_hi = np.zeros(size, dtype=np.int32)
        self.count = np.zeros(size, dtype=np.int64)
        self.child_a = np.full(size, -1, dtype=np.int32)
        self.child_b = np.full(size, -1, dtype=np.int32)
        self.end_mark = np.zeros(size, dtype=bool)
        self.leaf_row = np.full(size, -1, dtype=np.int64)
        # leaf payload: the original event (table row leaf_row)
        self.leaf_id = np.full(size, -1, dtype=np.int64)
        self.leaf_enter = np.zeros(size, dtype=np.int64)
        self.leaf_leave = np.zeros(size, dtype=np.int64)
        self.leaf_track = np.zeros(size, dtype=np.int32)
        # attribute aggregates
        self.cat_masks: dict[str, np.ndarray] = {}
        self.cat_sets: dict[str, np.ndarray] = {}
        self.cat_vocab: dict[str, list[str]] = {}
        self.num_sum: dict[str, np.ndarray] = {}
        self.num_cnt: dict[str, np.ndarray] = {}
        self.num_min: dict[str, np.ndarray] = {}
        self.num_max: dict[str, np.ndarray] = {}
        # per-level (pid, lo, hi) triples when built level-wise
        self.levels: list[tuple[np.ndarray, np.ndarray, np.ndarray]] | None = None
        # value sets decoded from bitmasks, shared across nodes with equal masks
        self._mask_sets: dict[str, dict[int, frozenset[str]]] = {}

    def __len__(self) -> int:
        return self.size

    def node_attrs(self, pid: int) -> AttrSummary:
        cat: dict[str, frozenset[str]] = {}
        for attr, masks in self.cat_masks.items():
            m = int(masks[pid])
            if m:
                memo = self._mask_sets.setdefault(attr, {})
                s = memo.get(m)
                if s is None:
                    vocab = self.cat_vocab[attr]
                    s = frozenset(vocab[i] for i in range(m.bit_length()) if m >> i & 1)
                    memo[m] = s
                cat[attr] = s
        for attr, sets in self.cat_sets.items():
            s = sets[pid]
            if s:
                cat[attr] = s
        num: dict[str, NumericSummary] = {}
        for attr, cnts in self.num_cnt.items():
            c = int(cnts[pid])
            if c:
                num[attr] = NumericSummary(
                    min=float(self.num_min[attr][pid]),
                    max=float(self.num_max[attr][pid]),
                    mean=float(self.num_sum[attr][pid]) / c,
                    count=c,
                )
        if not cat and not num:
            return EMPTY_ATTRS
        return AttrSummary(cat, num)

    def node(self, pid: int) -> SummaryNode:
        if not 0 <= pid < self.size:
            raise KeyError((self.tree_id, pid))
        leaf = None
        if self.leaf_row[pid] >= 0:
            leaf = LeafEvent(
                id=int(self.leaf_id[pid]),
                track=int(self.leaf_track[pid]),
                enter=int(self.leaf_enter[pid]),
                leave=int(self.leaf_leave[pid]),
            )
        return SummaryNode(
            key=(self.tree_id, pid),
            begin=int(self.begin[pid]),
            end=int(self.end[pid]),
            track_lo=int(self.track_lo[pid]),
            track_hi=int(self.track_hi[pid]),
            count=int(self.count[pid]),
            child_a=int(self.child_a[pid]),
            child_b=int(self.child_b[pid]),
            end_mark=bool(self.end_mark[pid]),
            leaf=leaf,
            attrs=self.node_attrs(pid),
        )


@dataclass
class DatasetIndex:
    """A built index: one tree per track (1dkdt/agg) or one global tree."""

    kind: str
    trees: dict[int, TreeArrays]  # tree_id -> tree; per-track kinds use the track index

    @property
    def per_track(self) -> bool:
        return self.kind != KIND_2D

    def node_count(self) -> int:
        return sum(t.size for t in self.trees.values())


# --- fair count-splitting (per-track) ----------------------------------------


def _fair_structure(n: int, tree_id: int, kind: str) -> TreeArrays:
    """Preorder skeleton for n events: every event becomes a leaf, internal
    nodes split counts in half with the extra event on the right."""
    size = 2 * n - 1
    tree = TreeArrays(tree_id, kind, size)
    levels = []
    pid = np.zeros(1, dtype=np.int64)
    lo = np.zeros(1, dtype=np.int64)
    hi = np.full(1, n, dtype=np.int64)
    while len(pid):
        levels.append((pid, lo, hi))
        counts = hi - lo
        split = counts > 1
        if not split.any():
            break
        p, l, h = pid[split], lo[split], hi[split]
        lc = (h - l) // 2
        a = p + 1
        b = p + 2 * lc  # left subtree holds 2*lc - 1 nodes
        tree.child_a[p] = a
        tree.child_b[p] = b
        pid = np.concatenate((a, b))
        lo = np.concatenate((l, l + lc))
        hi = np.concatenate((l + lc, h))
    tree.levels = levels
    return tree


def _assign_leaf_rows_from_levels(tree: TreeArrays, row_offset: int) -> None:
    for pid, lo, hi in tree.levels:
        leaf = (hi - lo) == 1
        if leaf.any():
            tree.leaf_row[pid[leaf]] = row_offset + lo[leaf]


# --- agglomerative single-linkage (per-track) --------------------------------


def event_gap(enter_a: int, leave_a: int, enter_b: int, leave_b: int) -> int:
    """Temporal gap between two events; zero when they overlap or touch."""
    return max(0, max(enter_a, enter_b) - min(leave_a, leave_b))


def agg_merge_sequence(enter: np.ndarray, leave: np.ndarray) -> list[tuple[int, int, int]]:
    """Single-linkage merge order over events sorted by (enter, leave, id).

    Clusters are contiguous runs in sorted order; the distance between two
    adjacent runs is max(0, first_enter(right) - max_leave(left)), which
    equals the single-linkage minimum over all cross pairs.  Ties merge the
    pair whose left run starts earliest, then whose right run starts
    earliest.  Returns one (gap, left_run_start, right_run_start) triple per
    merge, run starts being first positions in sorted order.
    """
    n = len(enter)
    enter_l = enter.tolist() if hasattr(enter, "tolist") else list(enter)
    leave_l = leave.tolist() if hasattr(leave, "tolist") else list(leave)
    nxt = list(range(1, n)) + [-1]  # next run's lo, by run lo
    prv = [-1] + list(range(n - 1))
    run_maxl = leave_l[:]  # max leave within the run, by run lo
    seq = [0] * n
    alive = [True] * n

    heap: list[tuple[int, int, int, int, int]] = []
    for lo in range(n - 1):
        d = max(0, enter_l[lo + 1] - run_maxl[lo])
        heap.append((d, lo, lo + 1, 0, 0))
    heapq.heapify(heap)

    out: list[tuple[int, int, int]] = []
    while len(out) < n - 1:
        d, llo, rlo, sl, sr = heapq.heappop(heap)
        if not (alive[llo] and alive[rlo]) or seq[llo] != sl or seq[rlo] != sr:
            continue
        if nxt[llo] != rlo:
            continue
        out.append((d, llo, rlo))
        alive[rlo] = False
        run_maxl[llo] = max(run_maxl[llo], run_maxl[rlo])
        nxt[llo] = nxt[rlo]
        if nxt[rlo] >= 0:
            prv[nxt[rlo]] = llo
        seq[llo] += 1
        right = nxt[llo]
        if right >= 0:
            nd = max(0, enter_l[right] - run_maxl[llo])
            heapq.heappush(heap, (nd, llo, right, seq[llo], seq[right]))
        # bumping seq invalidated the (left, llo) entry too; its distance is
        # unchanged, so push a fresh copy
        left = prv[llo]
        if left >= 0:
            nd = max(0, enter_l[llo] - run_maxl[left])
            heapq.heappush(heap, (nd, left, llo, seq[left], seq[llo]))
    return out


def _agg_structure(enter: np.ndarray, leave: np.ndarray, tree_id: int, row_offset: int) -> TreeArrays:
    """Build the cluster tree by replaying the recorded merge sequence."""
    n = len(enter)
    size = 2 * n - 1
    if n == 1:
        tree = TreeArrays(tree_id, KIND_AGG, 1)
        tree.leaf_row[0] = row_offset
        return tree

    node_of = list(range(n))  # current tree node (creation id) per run lo

    # creation-order nodes: leaves 0..n-1, merges n..2n-2
    child_a = [-1] * size
    child_b = [-1] * size
    next_node = n
    for _, llo, rlo in agg_merge_sequence(enter, leave):
        node = next_node
        next_node += 1
        child_a[node] = node_of[llo]
        child_b[node] = node_of[rlo]
        node_of[llo] = node

    root = node_of[0]
    tree = TreeArrays(tree_id, KIND_AGG, size)
    # renumber creation ids to preorder
    pre_of = [-1] * size
    stack = [root]
    counter = 0
    ca, cb = tree.child_a, tree.child_b
    while stack:
        node = stack.pop()
        pre = counter
        counter += 1
        pre_of[node] = pre
        a, b = child_a[node], child_b[node]
        if a >= 0:
            stack.append(b)
            stack.append(a)
    # children links and leaf rows in preorder slots
    for node in range(size):
        pre = pre_of[node]
        a, b = child_a[node], child_b[node]
        if a >= 0:
            ca[pre] = pre_of[a]
            cb[pre] = pre_of[b]
        else:
            tree.leaf_row[pre] = row_offset + node  # leaf creation id == sorted position
    return tree


# --- global (time, track) tree ------------------------------------------------


def _build_2d_structure(table: EventTable, tree_id: int) -> TreeArrays:
    enter = table.enter.astype(np.int64)
    leave = table.leave.astype(np.int64)
    track = table.track.astype(np.int32)
    rows = np.arange(len(table), dtype=np.int64)

    # node columns in creation (BFS) order
    n_begin: list[int] = []
    n_end: list[int] = []
    n_tlo: list[int] = []
    n_thi: list[int] = []
    n_count: list[int] = []
    n_mark: list[bool] = []
    n_ca: list[int] = []
    n_cb: list[int] = []
    n_leaf: list[int] = []

    def new_node(e: np.ndarray, l: np.ndarray, t: np.ndarray, r: np.ndarray) -> int:
        nid = len(n_begin)
        hull_end = int(l.max())
        zero = e == l
        n_begin.append(int(e.min()))
        n_end.append(hull_end)
        n_tlo.append(int(t.min()))
        n_thi.append(int(t.max()))
        n_count.append(len(e))
        n_mark.append(bool((zero & (l == hull_end)).any()))
        n_ca.append(-1)
        n_cb.append(-1)
        n_leaf.append(int(r[0]) if len(e) == 1 else -1)
        return nid

    root = new_node(enter, leave, track, rows)
    frontier = [(root, enter, leave, track, rows, 0, False)]
    while frontier:
        nxt = []
        for nid, e, l, t, r, depth, fair in frontier:
            n = len(e)
            if n == 1:
                continue
            single = n_tlo[nid] == n_thi[nid]
            if fair or single:
                if not fair:
                    order = np.lexsort((r, l, e))
                    e, l, t, r = e[order], l[order], t[order], r[order]
                lc = n // 2
                parts = ((e[:lc], l[:lc], t[:lc], r[:lc]), (e[lc:], l[lc:], t[lc:], r[lc:]))
                child_fair = True
            else:
                begin, end = n_begin[nid], n_end[nid]
                if depth % 2 == 0 and end - begin >= 2:
                    mid = begin + (end - begin) // 2
                    cut = (e < mid) & (l > mid)
                    if cut.any():
                        ce, cl, ct, cr = e[cut], l[cut], t[cut], r[cut]
                        e = np.concatenate((e, np.full(cut.sum(), mid, dtype=np.int64)))
                        l = np.concatenate((np.where(cut, mid, l), cl))
                        t = np.concatenate((t, ct))
                        r = np.concatenate((r, cr))
                    left = l <= mid
                    # zero-length segments exactly at the midpoint go right
                    left &= ~((e == mid) & (l == mid))
                    parts = (
                        (e[left], l[left], t[left], r[left]),
                        (e[~left], l[~left], t[~left], r[~left]),
                    )
                else:
                    span = n_thi[nid] - n_tlo[nid] + 1
                    boundary = n_tlo[nid] + (span + 1) // 2  # extra track on top
                    top = t < boundary
                    parts = (
                        (e[top], l[top], t[top], r[top]),
                        (e[~top], l[~top], t[~top], r[~top]),
                    )
                child_fair = False
            a = new_node(*parts[0])
            b = new_node(*parts[1])
            n_ca[nid], n_cb[nid] = a, b
            nxt.append((a, *parts[0], depth + 1, child_fair))
            nxt.append((b, *parts[1], depth + 1, child_fair))
        frontier = nxt

    # renumber creation order to preorder
    size = len(n_begin)
    pre_of = np.full(size, -1, dtype=np.int64)
    stack = [0]
    counter = 0
    while stack:
        nid = stack.pop()
        pre_of[nid] = counter
        counter += 1
        if n_ca[nid] >= 0:
            stack.append(n_cb[nid])
            stack.append(n_ca[nid])

    tree = TreeArrays(tree_id, KIND_2D, size)
    order = np.argsort(pre_of)  # creation id at each preorder slot
    ca = np.asarray(n_ca, dtype=np.int64)
    cb = np.asarray(n_cb, dtype=np.int64)
    tree.begin = np.asarray(n_begin, dtype=np.int64)[order]
    tree.end = np.asarray(n_end, dtype=np.int64)[order]
    tree.track_lo = np.asarray(n_tlo, dtype=np.int32)[order]
    tree.track_hi = np.asarray(n_thi, dtype=np.int32)[order]
    tree.count = np.asarray(n_count, dtype=np.int64)[order]
    tree.end_mark = np.asarray(n_mark, dtype=bool)[order]
    internal = ca[order] >= 0
    tree.child_a = np.where(internal, pre_of[np.maximum(ca[order], 0)], -1).astype(np.int32)
    tree.child_b = np.where(internal, pre_of[np.maximum(cb[order], 0)], -1).astype(np.int32)
    tree.leaf_row = np.asarray(n_leaf, dtype=np.int64)[order]
    return tree


# --- attribute propagation and structural finalize ----------------------------


def propagate_attributes(tree: TreeArrays, table: EventTable) -> TreeArrays:
    """Attach attribute summaries to every node, bottom-up.

    Categorical attributes become the union of the children's value sets;
    numeric attributes carry min, max, count-weighted mean, and the count of
    events that declared the attribute.
    """
    overlap = set(table.cat_codes) & set(table.num_values)
    if overlap:
        raise BuildError(f"attributes declared with conflicting kinds: {sorted(overlap)}")
    size = tree.size
    leaf_pids = np.flatnonzero(tree.leaf_row >= 0)
    rows = tree.leaf_row[leaf_pids]

    for attr, codes in table.cat_codes.items():
        vocab = table.cat_vocab[attr]
        tree.cat_vocab[attr] = vocab
        c = codes[rows].astype(np.int64)
        if len(vocab) <= _MASK_VOCAB_LIMIT:
            masks = np.zeros(size, dtype=np.uint64)
            masks[leaf_pids] = np.where(
                c >= 0, np.uint64(1) << np.maximum(c, 0).astype(np.uint64), np.uint64(0)
            )
            tree.cat_masks[attr] = masks
        else:
            sets = np.empty(size, dtype=object)
            sets.fill(frozenset())
            for pid, code in zip(leaf_pids.tolist(), c.tolist()):
                if code >= 0:
                    sets[pid] = frozenset((vocab[code],))
            tree.cat_sets[attr] = sets

    for attr, values in table.num_values.items():
        v = values[rows]
        present = ~np.isnan(v)
        s = np.zeros(size, dtype=np.float64)
        cnt = np.zeros(size, dtype=np.int64)
        mn = np.full(size, np.inf, dtype=np.float64)
        mx = np.full(size, -np.inf, dtype=np.float64)
        s[leaf_pids] = np.where(present, v, 0.0)
        cnt[leaf_pids] = present
        mn[leaf_pids] = np.where(present, v, np.inf)
        mx[leaf_pids] = np.where(present, v, -np.inf)
        tree.num_sum[attr] = s
        tree.num_cnt[attr] = cnt
        tree.num_min[attr] = mn
        tree.num_max[attr] = mx

    if tree.levels is not None:
        for pid, _lo, _hi in reversed(tree.levels):
            p = pid[tree.child_a[pid] >= 0]
            if not len(p):
                continue
            a = tree.child_a[p]
            b = tree.child_b[p]
            for masks in tree.cat_masks.values():
                masks[p] = masks[a] | masks[b]
            for sets in tree.cat_sets.values():
                for i, j, k in zip(p.tolist(), a.tolist(), b.tolist()):
                    sets[i] = sets[j] | sets[k]
            for attr in tree.num_sum:
                tree.num_sum[attr][p] = tree.num_sum[attr][a] + tree.num_sum[attr][b]
                tree.num_cnt[attr][p] = tree.num_cnt[attr][a] + tree.num_cnt[attr][b]
                tree.num_min[attr][p] = np.minimum(tree.num_min[attr][a], tree.num_min[attr][b])
                tree.num_max[attr][p] = np.maximum(tree.num_max[attr][a], tree.num_max[attr][b])
    else:
        ca = tree.child_a.tolist()
        cb = tree.child_b.tolist()
        for masks_np in tree.cat_masks.values():
            m = masks_np.tolist()
            for i in range(size - 1, -1, -1):
                if ca[i] >= 0:
                    m[i] = m[ca[i]] | m[cb[i]]
            masks_np[:] = m
        for sets in tree.cat_sets.values():
            for i in range(size - 1, -1, -1):
                if ca[i] >= 0:
                    sets[i] = sets[ca[i]] | sets[cb[i]]
        for attr in tree.num_sum:
            s = tree.num_sum[attr].tolist()
            cnt = tree.num_cnt[attr].tolist()
            mn = tree.num_min[attr].tolist()
            mx = tree.num_max[attr].tolist()
            for i in range(size - 1, -1, -1):
                a = ca[i]
                if a >= 0:
                    b = cb[i]
                    s[i] = s[a] + s[b]
                    cnt[i] = cnt[a] + cnt[b]
                    mn[i] = min(mn[a], mn[b])
                    mx[i] = max(mx[a], mx[b])
            tree.num_sum[attr][:] = s
            tree.num_cnt[attr][:] = cnt
            tree.num_min[attr][:] = mn
            tree.num_max[attr][:] = mx
    return tree


def _finalize_structure(tree: TreeArrays, table: EventTable, track: int) -> None:
    """Fill hulls, counts, and end marks for a per-track tree bottom-up."""
    leaf_pids = np.flatnonzero(tree.leaf_row >= 0)
    rows = tree.leaf_row[leaf_pids]
    tree.begin[leaf_pids] = table.enter[rows]
    tree.end[leaf_pids] = table.leave[rows]
    tree.count[leaf_pids] = 1
    tree.end_mark[leaf_pids] = table.enter[rows] == table.leave[rows]
    tree.track_lo[:] = track
    tree.track_hi[:] = track

    if tree.levels is not None:
        for pid, _lo, _hi in reversed(tree.levels):
            p = pid[tree.child_a[pid] >= 0]
            if not len(p):
                continue
            a = tree.child_a[p]
            b = tree.child_b[p]
            tree.begin[p] = np.minimum(tree.begin[a], tree.begin[b])
            tree.end[p] = np.maximum(tree.end[a], tree.end[b])
            tree.count[p] = tree.count[a] + tree.count[b]
            tree.end_mark[p] = (tree.end_mark[a] & (tree.end[a] == tree.end[p])) | (
                tree.end_mark[b] & (tree.end[b] == tree.end[p])
            )
    else:
        ca = tree.child_a.tolist()
        cb = tree.child_b.tolist()
        begin = tree.begin.tolist()
        end = tree.end.tolist()
        count = tree.count.tolist()
        mark = tree.end_mark.tolist()
        for i in range(tree.size - 1, -1, -1):
            a = ca[i]
            if a < 0:
                continue
            b = cb[i]
            begin[i] = min(begin[a], begin[b])
            e = max(end[a], end[b])
            end[i] = e
            count[i] = count[a] + count[b]
            mark[i] = (mark[a] and end[a] == e) or (mark[b] and end[b] == e)
        tree.begin[:] = begin
        tree.end[:] = end
        tree.count[:] = count
        tree.end_mark[:] = mark


def _fill_leaf_payload(tree: TreeArrays, table: EventTable) -> None:
    leaf_pids = np.flatnonzero(tree.leaf_row >= 0)
    rows = tree.leaf_row[leaf_pids]
    tree.leaf_id[leaf_pids] = table.ids[rows]
    tree.leaf_enter[leaf_pids] = table.enter[rows]
    tree.leaf_leave[leaf_pids] = table.leave[rows]
    tree.leaf_track[leaf_pids] = table.track[rows]


# --- public builders ----------------------------------------------------------


def build_track_forest(table: EventTable, kind: str) -> DatasetIndex:
    """Build one tree per non-empty track.  Tree ids equal track indices."""
    if kind not in (KIND_1D, KIND_AGG):
        raise BuildError(f"per-track forest kind must be {KIND_1D!r} or {KIND_AGG!r}")
    if len(table) == 0:
        return DatasetIndex(kind, {})
    sorted_table = table.sorted_by_track_time()
    trees: dict[int, TreeArrays] = {}
    for track, (start, stop) in sorted_table.track_slices().items():
        n = stop - start
        if kind == KIND_1D:
            tree = _fair_structure(n, track, KIND_1D)
            _assign_leaf_rows_from_levels(tree, start)
        else:
            tree = _agg_structure(
                sorted_table.enter[start:stop], sorted_table.leave[start:stop], track, start
            )
        _finalize_structure(tree, sorted_table, track)
        _fill_leaf_payload(tree, sorted_table)
        propagate_attributes(tree, sorted_table)
        trees[track] = tree
    return DatasetIndex(kind, trees)


def build_global_tree(table: EventTable) -> DatasetIndex:
    """Build the single (time, track) tree.  Its tree id is 0."""
    if len(table) == 0:
        return DatasetIndex(KIND_2D, {})
    tree = _build_2d_structure(table, 0)
    _fill_leaf_payload(tree, table)
    propagate_attributes(tree, table)
    return DatasetIndex(KIND_2D, {0: tree})


def build_index(table: EventTable, kind: str) -> DatasetIndex:
    if kind == KIND_2D:
        return build_global_tree(table)
    return build_track_forest(table, kind)
