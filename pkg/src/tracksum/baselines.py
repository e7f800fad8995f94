"""Reference fetch strategies which the summary trees are benchmarked against.

All four run in-process over the same columnar event table; their semantics
mirror the SQL they stand in for:

- ``naive_query``: closed-interval range scan
  (``leave >= begin AND enter <= end``).
- ``BinnedTable``/``sat_query``: per-track prefix sums over a fixed time
  grid; per queried pixel column occupancy is a prefix difference.  Queries
  finer than the grid raise ``SatResolutionError``.
- ``reservoir_query``: algorithm-R sampling, deterministic per seed, sample
  size defaulting to the visible pixel count.
- ``m4_query``: per pixel bin, keep the rows whose timestamp equals the
  bin's min or max; enter rows carry ct=1, leave rows ct=0, and the
  enter/leave row sets are deduplicated as a union.  Bin assignment rounds
  half away from zero, computed in exact integer arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import EventTable, ModelError, TimeSpan


class BaselineError(ModelError):
    pass


class SatResolutionError(BaselineError):
    pass


# --- naive --------------------------------------------------------------------


def naive_query(
    table: EventTable,
    window: TimeSpan,
    track_lo: int,
    track_hi: int,
    mask: np.ndarray | None = None,
) -> np.ndarray:
    """Row indices of events matching the closed-interval scan.  ``mask``
    narrows the scan (conditional queries)."""
    m = (
        (table.leave >= window.begin)
        & (table.enter <= window.end)
        & (table.track >= track_lo)
        & (table.track <= track_hi)
    )
    if mask is not None:
        m &= mask
    return np.flatnonzero(m)


def attr_mask(table: EventTable, attr: str, value: str) -> np.ndarray:
    """Boolean row mask for a categorical attribute equality predicate."""
    codes = table.cat_codes.get(attr)
    if codes is None:
        return np.zeros(len(table), dtype=bool)
    try:
        code = table.cat_vocab[attr].index(value)
    except ValueError:
        return np.zeros(len(table), dtype=bool)
    return codes == code


# --- summed area table ----------------------------------------------------------


class BinnedTable:
    """Per-track prefix sums over a fixed grid of ``bins`` covering the
    extent: event-presence counts and covered duration per bin."""

    def __init__(self, extent: TimeSpan, bins: int, presence: dict[int, np.ndarray], duration: dict[int, np.ndarray]):
        self.extent = extent
        self.bins = bins
        self.presence = presence  # track -> prefix array of length bins+1
        self.duration = duration

    @classmethod
    def build(
        cls,
        table: EventTable,
        bins: int,
        extent: TimeSpan | None = None,
        mask: np.ndarray | None = None,
    ) -> "BinnedTable":
        if bins < 1:
            raise BaselineError(f"bins must be >= 1, got {bins}")
        if extent is None:
            extent = table.time_extent()
        if extent.length == 0:
            raise BaselineError("cannot bin a zero-length extent")
        eb, length = extent.begin, extent.length
        presence: dict[int, np.ndarray] = {}
        duration: dict[int, np.ndarray] = {}
        rows = np.arange(len(table)) if mask is None else np.flatnonzero(mask)
        track = table.track[rows]
        # bin edges: edge(b) = smallest t with (t - eb) * bins // length == b
        b_idx = np.arange(bins + 1, dtype=np.int64)
        edges = eb + -(-b_idx * length // bins)
        # with more bins than time units some bins are empty ranges; nothing
        # can be present in them, but the difference array below smears
        # durational events across interior bins, so they get zeroed
        zero_width = edges[1:] == edges[:-1]
        for tr in np.unique(track):
            sel = rows[track == tr]
            enter = table.enter[sel]
            leave = table.leave[sel]
            s = np.clip(enter, eb, eb + length)
            t = np.clip(leave, eb, eb + length)
            # presence via a difference array over occupied bin ranges
            acc = np.zeros(bins + 1, dtype=np.int64)
            durational = t > s
            if durational.any():
                b0 = (s[durational] - eb) * bins // length
                b1 = (t[durational] - 1 - eb) * bins // length
                np.add.at(acc, b0, 1)
                np.add.at(acc, b1 + 1, -1)
            instant = (leave == enter) & (enter >= eb) & (enter < eb + length)
            if instant.any():
                bi = (enter[instant] - eb) * bins // length
                np.add.at(acc, bi, 1)
                np.add.at(acc, bi + 1, -1)
            counts = np.cumsum(acc[:-1])
            counts[zero_width] = 0
            presence[int(tr)] = np.concatenate(([0], np.cumsum(counts)))
            duration[int(tr)] = _coverage_prefix(edges - eb, np.sort(s) - eb, np.sort(t) - eb)
        return cls(extent, bins, presence, duration)

    def bin_width_exceeds(self, window: TimeSpan, columns: int) -> bool:
        """True when a query column is narrower than one grid bin."""
        return window.length * self.bins < columns * self.extent.length


def _coverage_prefix(edges: np.ndarray, s_sorted: np.ndarray, t_sorted: np.ndarray) -> np.ndarray:
    """Covered-duration prefix over bins: F(edge) - F(0) for the coverage
    integral F(x) = sum(min(leave, x) - min(enter, x)).  All coordinates are
    relative to the extent begin."""
    n = len(s_sorted)
    if n and int(edges[-1]) * n >= 2**62:
        # exact fallback for extreme extents where int64 products overflow
        sl, tl = s_sorted.tolist(), t_sorted.tolist()
        sp = [0]
        tp = [0]
        for v in sl:
            sp.append(sp[-1] + v)
        for v in tl:
            tp.append(tp[-1] + v)
        from bisect import bisect_right

        out = []
        for x in edges.tolist():
            i = bisect_right(tl, x)
            j = bisect_right(sl, x)
            out.append((tp[i] + x * (n - i)) - (sp[j] + x * (n - j)))
        f = np.asarray(out, dtype=np.int64)
    else:
        sp = np.concatenate(([0], np.cumsum(s_sorted)))
        tp = np.concatenate(([0], np.cumsum(t_sorted)))
        i = np.searchsorted(t_sorted, edges, side="right")
        j = np.searchsorted(s_sorted, edges, side="right")
        f = (tp[i] + edges * (n - i)) - (sp[j] + edges * (n - j))
    return f - f[0]


def sat_query(
    table: BinnedTable,
    window: TimeSpan,
    track_lo: int,
    track_hi: int,
    columns: int,
) -> dict[int, np.ndarray]:
    """Per-column presence counts per track over the window.

    Each column sums the grid bins it touches, so partially covered edge
    bins smear into the column.  Queries finer than the grid resolution
    raise ``SatResolutionError``.
    """
    if columns < 1:
        raise BaselineError(f"columns must be >= 1, got {columns}")
    if window.length == 0:
        return {}
    if table.bin_width_exceeds(window, columns):
        raise SatResolutionError(
            f"window of {window.length} ns over {columns} columns is finer than "
            f"the table grid ({table.bins} bins over {table.extent.length} ns)"
        )
    eb, elen = table.extent.begin, table.extent.length
    B, L = window.begin, window.length
    j = np.arange(columns + 1, dtype=np.int64)
    col_edges = B + -(-j * L // columns)
    col_edges = np.clip(col_edges, eb, eb + elen)
    b0 = (col_edges[:-1] - eb) * table.bins // elen
    b1 = (np.maximum(col_edges[1:], col_edges[:-1] + 1) - 1 - eb) * table.bins // elen
    b1 = np.minimum(b1, table.bins - 1)
    out: dict[int, np.ndarray] = {}
    for tr in range(track_lo, track_hi + 1):
        pref = table.presence.get(tr)
        if pref is None:
            continue
        counts = pref[b1 + 1] - pref[b0]
        out[tr] = counts
    return out


# --- reservoir sampling ---------------------------------------------------------


def reservoir_query(rows: np.ndarray, k: int, seed: int = 100) -> np.ndarray:
    """Uniform sample of min(k, n) rows via algorithm R: row i replaces a
    random reservoir slot with probability k/(i+1).  Same (row order, k,
    seed) always yields the same sample."""
    if k < 0:
        raise BaselineError(f"sample size must be >= 0, got {k}")
    n = len(rows)
    if n <= k:
        return rows.copy()
    if k == 0:
        return rows[:0].copy()
    rng = np.random.Generator(np.random.PCG64(seed))
    # slot draws for rows k..n-1, all at once; only draws < k replace
    j = (rng.random(n - k) * np.arange(k + 1, n + 1)).astype(np.int64)
    reservoir = rows[:k].copy()
    hit = np.flatnonzero(j < k)
    for i in hit.tolist():
        reservoir[j[i]] = rows[k + i]
    return reservoir


# --- M4 ------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class M4Row:
    k: int
    atime: int
    ct: int


def _round_half_away(num: np.ndarray, den: int) -> np.ndarray:
    """round(num/den) with ties away from zero, exact integer arithmetic."""
    num = num.astype(np.int64)
    pos = num >= 0
    out = np.empty_like(num)
    out[pos] = (2 * num[pos] + den) // (2 * den)
    out[~pos] = -((2 * -num[~pos] + den) // (2 * den))
    return out


def m4_query(
    enter: np.ndarray,
    leave: np.ndarray,
    window: TimeSpan,
    bins: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """M4 selection for one track's window-overlapping events.

    Returns (k, atime, ct) arrays ordered by (k, atime, ct): per bin, the
    rows whose timestamp equals the bin's min or max survive.
    """
    if window.length == 0:
        raise BaselineError("m4 requires a window with end > begin")
    if bins < 1:
        raise BaselineError(f"bins must be >= 1, got {bins}")
    at = np.concatenate((enter, leave))
    ct = np.concatenate((np.ones(len(enter), dtype=np.int64), np.zeros(len(leave), dtype=np.int64)))
    if len(at) == 0:
        return at, at, ct
    # UNION semantics: drop duplicate (atime, ct) pairs
    pairs = np.stack((at, ct), axis=1)
    pairs = np.unique(pairs, axis=0)
    at, ct = pairs[:, 0], pairs[:, 1]
    k = _round_half_away(bins * (at - window.begin), window.length)
    order = np.lexsort((ct, at, k))
    k, at, ct = k[order], at[order], ct[order]
    # per-bin min/max atime: rows are (k, atime)-sorted, so the bin min sits
    # at each group start and the max at each group end
    boundaries = np.flatnonzero(np.diff(k)) + 1
    starts = np.concatenate(([0], boundaries))
    ends = np.concatenate((boundaries, [len(k)]))
    marks = np.zeros(len(k), dtype=np.int64)
    marks[boundaries] = 1
    group = np.cumsum(marks)
    lo_t = at[starts][group]
    hi_t = at[ends - 1][group]
    keep = (at == lo_t) | (at == hi_t)
    return k[keep], at[keep], ct[keep]


def m4_rows(k: np.ndarray, at: np.ndarray, ct: np.ndarray) -> list[M4Row]:
    return [M4Row(int(a), int(b), int(c)) for a, b, c in zip(k, at, ct)]


def m4_bars(at: np.ndarray, ct: np.ndarray) -> tuple[list[tuple[int, int]], list[int]]:
    """Reconstruct drawable bars from retained endpoint rows of one track.

    Rows are processed in (atime, ct) order; an enter row opens a bar and a
    leave row closes the most recently opened one.  Rows left unpaired
    (their partner fell to the bin filter) paint only their own instant.
    """
    order = np.lexsort((ct, at))
    bars: list[tuple[int, int]] = []
    marks: list[int] = []
    stack: list[int] = []
    for a, c in zip(at[order].tolist(), ct[order].tolist()):
        if c == 1:
            stack.append(a)
        elif stack:
            bars.append((stack.pop(), a))
        else:
            marks.append(a)
    marks.extend(stack)
    return bars, marks
