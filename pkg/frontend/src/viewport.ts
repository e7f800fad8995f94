/** Viewport math. All timestamps are nanoseconds held as bigint so the
 * pixel mapping stays exact at any zoom; the server assumes the same affine
 * map, column(t) = floor((t - begin) * canvasPx / span). */

export interface Filter {
  attr: string;
  value: string;
}

export interface Viewport {
  /** Visible half-open time window [begin, end). */
  begin: bigint;
  end: bigint;
  trackLo: number;
  trackHi: number;
  canvasPx: number;
  pixelWindow: number;
  filter: Filter | null;
}

export interface Extent {
  begin: bigint;
  end: bigint;
}

export function span(v: Viewport): bigint {
  return v.end - v.begin;
}

function ceilDiv(a: bigint, b: bigint): bigint {
  return (a + b - 1n) / b;
}

/** Pixel column a timestamp lands in. Only meaningful for t in [begin, end). */
export function columnOfTime(v: Viewport, t: bigint): number {
  return Number(((t - v.begin) * BigInt(v.canvasPx)) / span(v));
}

/** Shift the window so begin stays inside the extent and the span is kept
 * whenever it fits. */
export function clampToExtent(v: Viewport, extent: Extent): Viewport {
  let s = span(v);
  const avail = extent.end - extent.begin;
  if (s > avail) s = avail;
  let begin = v.begin;
  if (begin < extent.begin) begin = extent.begin;
  if (begin + s > extent.end) begin = extent.end - s;
  if (begin === v.begin && begin + s === v.end) return v;
  return { ...v, begin, end: begin + s };
}

/** Pan by a pixel delta; positive moves the window later in time. Returns
 * the same object for a zero delta so callers can skip the re-query. */
export function pan(v: Viewport, deltaPx: number, extent: Extent): Viewport {
  if (deltaPx === 0) return v;
  const shift = (BigInt(deltaPx) * span(v)) / BigInt(v.canvasPx);
  if (shift === 0n) return v;
  return clampToExtent({ ...v, begin: v.begin + shift, end: v.end + shift }, extent);
}

/** Best rational num/den for a float factor, by continued fractions. Exact
 * for the factors UI gestures produce (2, 1.5, 1.25 and their inverses), so
 * zooming in and back out cancels instead of accumulating drift. */
export function rationalize(factor: number): { num: bigint; den: bigint } {
  let [h0, h1, k0, k1] = [0n, 1n, 1n, 0n];
  let x = factor;
  for (let i = 0; i < 40; i++) {
    const a = BigInt(Math.floor(x));
    [h0, h1] = [h1, a * h1 + h0];
    [k0, k1] = [k1, a * k1 + k0];
    if (k1 > 1n << 20n) break;
    const approx = Number(h1) / Number(k1);
    if (Math.abs(approx - factor) <= factor * 1e-12) return { num: h1, den: k1 };
    x = 1 / (x - Math.floor(x));
    if (!Number.isFinite(x)) break;
  }
  return { num: h1, den: k1 };
}

/** Scale the span by 1/factor about the time under anchorPx. The anchored
 * timestamp maps to the same pixel afterwards (when no clamp interferes)
 * and the span never drops below one nanosecond per pixel. */
export function zoom(v: Viewport, anchorPx: number, factor: number, extent: Extent): Viewport {
  if (!(factor > 0) || !Number.isFinite(factor)) {
    throw new RangeError(`zoom factor must be positive, got ${factor}`);
  }
  if (factor === 1) return v;
  const s = span(v);
  const { num, den } = rationalize(factor);
  let ns = (2n * s * den + num) / (2n * num); // round-half-up of s/factor
  const minSpan = BigInt(v.canvasPx);
  if (ns < minSpan) ns = minSpan;
  if (ns === s) return v;
  const w = BigInt(v.canvasPx);
  const px = BigInt(Math.min(Math.max(anchorPx, 0), v.canvasPx - 1));
  // ceil on both sides keeps the anchor on its pixel (d = ceil(px*ns/w)
  // satisfies px*ns <= d*w < (px+1)*ns while ns >= w) and makes in/out
  // round trips cancel: re-deriving the anchor time after the first zoom
  // reproduces it exactly instead of drifting by the floor/ceil gap
  const anchorTime = v.begin + ceilDiv(px * s, w);
  const begin = anchorTime - ceilDiv(px * ns, w);
  return clampToExtent({ ...v, begin, end: begin + ns }, extent);
}

/** Full-extent overview at the viewport's current settings. */
export function overview(v: Viewport, extent: Extent): Viewport {
  if (v.begin === extent.begin && v.end === extent.end) return v;
  return { ...v, begin: extent.begin, end: extent.end };
}

/** Keep the window but change the rendering width, preserving the minimum
 * one-nanosecond-per-pixel span. */
export function resize(v: Viewport, canvasPx: number, extent: Extent): Viewport {
  if (canvasPx === v.canvasPx) return v;
  const out = { ...v, canvasPx };
  if (span(out) < BigInt(canvasPx)) out.end = out.begin + BigInt(canvasPx);
  return clampToExtent(out, extent);
}
