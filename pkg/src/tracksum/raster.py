"""Binary occupancy rasters and structural similarity between them.

The raster reproduces chart geometry: each track owns a 4-pixel row band
separated by 1-pixel gaps, and the time axis maps onto ``width`` columns
(3672 by default, a full-width chart canvas).

Column assignment is exact integer arithmetic over the half-open query
window [B, E) of length L mapped to W columns:

- a durational intersection [s, t), t > s, paints columns
  ``(s - B) * W // L`` through ``((t - B) * W - 1) // L``: exactly the
  columns with which it shares positive measure;
- a zero-duration instant at t (instant events, or a summary whose hull ends
  in one) paints the single column ``(t - B) * W // L`` when B <= t < E.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import EventTable, ModelError, TimeSpan
from .query import SummarySlice

DEFAULT_WIDTH = 3672
ROW_HEIGHT = 4
ROW_GAP = 1


class RasterError(ModelError):
    pass


@dataclass(frozen=True)
class SsimParams:
    window: int = 8
    k1: float = 0.01
    k2: float = 0.03
    data_range: float = 1.0

    @property
    def c1(self) -> float:
        return (self.k1 * self.data_range) ** 2

    @property
    def c2(self) -> float:
        return (self.k2 * self.data_range) ** 2


@dataclass
class RasterGrid:
    """Binary occupancy image for tracks ``track_lo..track_hi`` over a
    query window."""

    cells: np.ndarray  # float64, 0.0 or 1.0, shape (height, width)
    track_lo: int
    track_hi: int

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    def track_row(self, track: int) -> np.ndarray:
        """One representative pixel row of the track's band."""
        if not self.track_lo <= track <= self.track_hi:
            raise RasterError(f"track {track} outside raster range")
        return self.cells[(track - self.track_lo) * (ROW_HEIGHT + ROW_GAP)]


def grid_height(n_tracks: int) -> int:
    if n_tracks < 1:
        raise RasterError("raster needs at least one track")
    return n_tracks * ROW_HEIGHT + (n_tracks - 1) * ROW_GAP


def _empty_grid(track_lo: int, track_hi: int, width: int) -> RasterGrid:
    h = grid_height(track_hi - track_lo + 1)
    return RasterGrid(np.zeros((h, width), dtype=np.float64), track_lo, track_hi)


def _paint_band(grid: RasterGrid, track: int, occ: np.ndarray) -> None:
    top = (track - grid.track_lo) * (ROW_HEIGHT + ROW_GAP)
    grid.cells[top : top + ROW_HEIGHT][:, occ] = 1.0


def _check_extent(window: TimeSpan, width: int) -> None:
    if window.length * width >= 2**63:
        raise RasterError("window too long to rasterize with integer math")


def rasterize_events(
    table: EventTable,
    window: TimeSpan,
    track_lo: int,
    track_hi: int,
    width: int = DEFAULT_WIDTH,
) -> RasterGrid:
    """Ground-truth raster straight from the event columns."""
    _check_extent(window, width)
    grid = _empty_grid(track_lo, track_hi, width)
    if window.length == 0 or len(table) == 0:
        return grid
    B, E, L, W = window.begin, window.end, window.length, width
    enter, leave, track = table.enter, table.leave, table.track

    in_tracks = (track >= track_lo) & (track <= track_hi)
    durational = (leave > enter) & (enter < E) & (leave > B) & in_tracks
    instant = (leave == enter) & (enter >= B) & (enter < E) & in_tracks

    acc = np.zeros((track_hi - track_lo + 1, W + 1), dtype=np.int64)
    if durational.any():
        s = np.maximum(enter[durational], B) - B
        t = np.minimum(leave[durational], E) - B
        c0 = s * W // L
        c1 = (t * W - 1) // L
        rows = track[durational] - track_lo
        np.add.at(acc, (rows, c0), 1)
        np.add.at(acc, (rows, c1 + 1), -1)
    if instant.any():
        c = (enter[instant] - B) * W // L
        rows = track[instant] - track_lo
        np.add.at(acc, (rows, c), 1)
        np.add.at(acc, (rows, c + 1), -1)
    occ = np.cumsum(acc[:, :-1], axis=1) > 0
    for tr in range(track_lo, track_hi + 1):
        row = occ[tr - track_lo]
        if row.any():
            _paint_band(grid, tr, row)
    return grid


def rasterize_slices(
    slices: list[SummarySlice],
    window: TimeSpan,
    track_lo: int,
    track_hi: int,
    width: int = DEFAULT_WIDTH,
) -> RasterGrid:
    """Raster for query results: every slice paints its track range over the
    columns its time bounds touch inside the window."""
    _check_extent(window, width)
    grid = _empty_grid(track_lo, track_hi, width)
    if window.length == 0:
        return grid
    B, E, L, W = window.begin, window.end, window.length, width
    occ = np.zeros((track_hi - track_lo + 1, W), dtype=bool)
    for s in slices:
        lo = max(s.track_lo, track_lo)
        hi = min(s.track_hi, track_hi)
        if lo > hi:
            continue
        c0 = c1 = None
        sb = max(s.begin, B)
        se = min(s.end, E)
        if se > sb:
            c0 = (sb - B) * W // L
            c1 = ((se - B) * W - 1) // L
        if s.end_mark and B <= s.end < E:
            m = (s.end - B) * W // L
            if c0 is None:
                c0 = c1 = m
            else:
                c1 = max(c1, m)
        if c0 is None:
            continue
        occ[lo - track_lo : hi - track_lo + 1, c0 : c1 + 1] = True
    for tr in range(track_lo, track_hi + 1):
        row = occ[tr - track_lo]
        if row.any():
            _paint_band(grid, tr, row)
    return grid


def occupied_columns(grid: RasterGrid) -> dict[int, list[int]]:
    """Columns with ink, per track.  Useful as a compact raster fingerprint."""
    out: dict[int, list[int]] = {}
    for tr in range(grid.track_lo, grid.track_hi + 1):
        cols = np.flatnonzero(grid.track_row(tr) > 0)
        if len(cols):
            out[tr] = cols.tolist()
    return out


def grids_equal(a: RasterGrid, b: RasterGrid) -> bool:
    return (
        a.track_lo == b.track_lo
        and a.track_hi == b.track_hi
        and a.cells.shape == b.cells.shape
        and bool(np.array_equal(a.cells, b.cells))
    )


def _box_sums(img: np.ndarray, win: int) -> np.ndarray:
    s = np.zeros((img.shape[0] + 1, img.shape[1] + 1), dtype=np.float64)
    np.cumsum(img, axis=0, out=s[1:, 1:])
    np.cumsum(s[1:, 1:], axis=1, out=s[1:, 1:])
    return s[win:, win:] - s[:-win, win:] - s[win:, :-win] + s[:-win, :-win]


def ssim(a: np.ndarray | RasterGrid, b: np.ndarray | RasterGrid, params: SsimParams = SsimParams()) -> float:
    """Mean structural similarity over all sliding windows (stride 1).

    Windows use population statistics; the window shrinks to the image when
    the image is smaller than the configured size.  Identical images score
    exactly 1.0.
    """
    ia = a.cells if isinstance(a, RasterGrid) else np.asarray(a, dtype=np.float64)
    ib = b.cells if isinstance(b, RasterGrid) else np.asarray(b, dtype=np.float64)
    if ia.shape != ib.shape:
        raise RasterError(f"shape mismatch: {ia.shape} vs {ib.shape}")
    if ia.size == 0:
        raise RasterError("cannot compare empty images")
    win = min(params.window, ia.shape[0], ia.shape[1])
    n = win * win
    mu_a = _box_sums(ia, win) / n
    mu_b = _box_sums(ib, win) / n
    var_a = _box_sums(ia * ia, win) / n - mu_a * mu_a
    var_b = _box_sums(ib * ib, win) / n - mu_b * mu_b
    cov = _box_sums(ia * ib, win) / n - mu_a * mu_b
    c1, c2 = params.c1, params.c2
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def export_png(grid: RasterGrid, path: Path) -> None:
    """Write the raster as a grayscale PNG with pinned encoder settings, so
    the same grid always produces the same bytes."""
    from PIL import Image

    img = Image.fromarray((grid.cells * 255).astype(np.uint8), mode="L")
    img.save(Path(path), format="PNG", compress_level=6)
