/** Slice painting, kept separate from the DOM so tests can rasterize into a
 * bit grid and diff it against the server's raster oracle. The column math
 * mirrors the server's: a bar covers every column its half-open time range
 * touches, and an end mark additionally inks the column holding its end
 * timestamp.
 */

import { MULTI_VALUE_FILL, SUMMARY_FILL, colorFor } from "./colors.js";
import type { WireSlice } from "./types.js";
import { span, type Viewport } from "./viewport.js";

export interface SliceStyle {
  exact: boolean;
  fill: string;
}

/** Receives paint commands in cell coordinates: inclusive column and track
 * ranges. The browser adapter turns these into canvas rects; the test
 * adapter sets bits. */
export interface RectSink {
  rect(c0: number, c1: number, trackLo: number, trackHi: number, style: SliceStyle): void;
}

/** Inclusive column range a slice inks inside the viewport, or null when it
 * paints nothing (entirely outside, or zero-width without an end mark). */
export function sliceColumns(
  v: Viewport,
  begin: bigint,
  end: bigint,
  endMark: boolean,
): { c0: number; c1: number } | null {
  const w = BigInt(v.canvasPx);
  const len = span(v);
  const sb = begin > v.begin ? begin : v.begin;
  const se = end < v.end ? end : v.end;
  let c0 = -1;
  let c1 = -1;
  if (se > sb) {
    c0 = Number(((sb - v.begin) * w) / len);
    c1 = Number(((se - v.begin) * w - 1n) / len);
  }
  if (endMark && end >= v.begin && end < v.end) {
    const m = Number(((end - v.begin) * w) / len);
    if (c0 < 0) {
      c0 = m;
      c1 = m;
    } else if (m > c1) {
      c1 = m;
    }
  }
  return c0 < 0 ? null : { c0, c1 };
}

/** Pick the fill for a slice: attribute color when the slice is exact and
 * carries a single value of colorAttr, a neutral tone for multi-value, and
 * the flat summary tone for everything summarized. */
export function styleFor(s: WireSlice, colorAttr: string | null): SliceStyle {
  if (!s.exact) return { exact: false, fill: SUMMARY_FILL };
  const values = colorAttr !== null ? s.attrs?.categorical?.[colorAttr] : undefined;
  if (values && values.length === 1) return { exact: true, fill: colorFor(values[0]) };
  return { exact: true, fill: MULTI_VALUE_FILL };
}

/** Paint a slice list. Does no per-event work: one sink call per slice. */
export function paintSlices(
  sink: RectSink,
  slices: WireSlice[],
  v: Viewport,
  colorAttr: string | null,
): void {
  for (const s of slices) {
    const cols = sliceColumns(v, BigInt(s.begin), BigInt(s.end), s.end_mark);
    if (cols === null) continue;
    const tLo = Math.max(s.track_lo, v.trackLo);
    const tHi = Math.min(s.track_hi, v.trackHi);
    if (tLo > tHi) continue;
    sink.rect(cols.c0, cols.c1, tLo, tHi, styleFor(s, colorAttr));
  }
}

/** Test double: a per-track bit grid recording which columns got ink. */
export class OccupancyGrid implements RectSink {
  private readonly rows: Uint8Array[];

  constructor(
    readonly trackLo: number,
    readonly trackHi: number,
    readonly width: number,
  ) {
    this.rows = Array.from({ length: trackHi - trackLo + 1 }, () => new Uint8Array(width));
  }

  rect(c0: number, c1: number, trackLo: number, trackHi: number, _style: SliceStyle): void {
    for (let tr = Math.max(trackLo, this.trackLo); tr <= Math.min(trackHi, this.trackHi); tr++) {
      const row = this.rows[tr - this.trackLo];
      for (let c = Math.max(c0, 0); c <= Math.min(c1, this.width - 1); c++) row[c] = 1;
    }
  }

  /** Occupied columns per track, shaped like the server's raster answer;
   * tracks with no ink are left out. */
  occupied(): Record<string, number[]> {
    const out: Record<string, number[]> = {};
    for (let tr = this.trackLo; tr <= this.trackHi; tr++) {
      const row = this.rows[tr - this.trackLo];
      const cols: number[] = [];
      for (let c = 0; c < row.length; c++) if (row[c]) cols.push(c);
      if (cols.length) out[String(tr)] = cols;
    }
    return out;
  }
}
