import { describe, expect, it } from "vitest";

import {
  clampToExtent,
  columnOfTime,
  pan,
  rationalize,
  resize,
  span,
  zoom,
  type Extent,
  type Viewport,
} from "../src/viewport.js";

const EXT: Extent = { begin: 0n, end: 10_000_000n };

function vp(begin: bigint, end: bigint, canvasPx = 1000): Viewport {
  return { begin, end, trackLo: 0, trackHi: 3, canvasPx, pixelWindow: 1, filter: null };
}

describe("pan", () => {
  it("moves by delta times time-per-pixel", () => {
    // 1000 ns over 1000 px = 1 ns per px
    const v = vp(2000n, 3000n);
    const out = pan(v, 100, EXT);
    expect(out.begin).toBe(2100n);
    expect(out.end).toBe(3100n);
  });

  it("returns the same object for delta zero, so no query is issued", () => {
    const v = vp(0n, 5000n);
    expect(pan(v, 0, EXT)).toBe(v);
  });

  it("clamps at the extent end keeping the span", () => {
    const v = vp(9_990_000n, 9_995_000n);
    const out = pan(v, 5000, EXT);
    expect(out.end).toBe(EXT.end);
    expect(span(out)).toBe(5000n);
  });

  it("clamps at the extent begin", () => {
    const v = vp(100n, 5100n);
    const out = pan(v, -1000, EXT);
    expect(out.begin).toBe(0n);
    expect(span(out)).toBe(5000n);
  });

  it("pans left for negative deltas", () => {
    const v = vp(5000n, 7000n); // 2 ns per px
    const out = pan(v, -10, EXT);
    expect(out.begin).toBe(4980n);
  });
});

describe("zoom", () => {
  it("is the identity at factor one", () => {
    const v = vp(0n, 8000n);
    expect(zoom(v, 400, 1, EXT)).toBe(v);
  });

  it("rejects non-positive factors", () => {
    expect(() => zoom(vp(0n, 8000n), 0, 0, EXT)).toThrow(RangeError);
    expect(() => zoom(vp(0n, 8000n), 0, -2, EXT)).toThrow(RangeError);
  });

  it("about the left edge keeps begin and halves the span", () => {
    const v = vp(2000n, 10_000n);
    const out = zoom(v, 0, 2, EXT);
    expect(out.begin).toBe(2000n);
    expect(span(out)).toBe(4000n);
  });

  it("keeps the anchored timestamp on the anchor pixel", () => {
    const cases: Array<[bigint, bigint, number, number]> = [
      [0n, 1_000_000n, 517, 2],
      [250_000n, 9_750_000n, 13, 1.25],
      [42n, 5_000_042n, 999, 1.5],
      [0n, 10_000_000n, 500, 3.7],
    ];
    for (const [b, e, anchor, factor] of cases) {
      const before = vp(b, e);
      const t = before.begin + (BigInt(anchor) * span(before)) / 1000n;
      const after = zoom(before, anchor, factor, EXT);
      expect(columnOfTime(after, t)).toBe(anchor);
    }
  });

  it("zoom in then out restores the span within 1 ns", () => {
    for (const factor of [1.25, 1.5, 2]) {
      for (const anchor of [0, 250, 999]) {
        const v = vp(1_000_000n, 8_765_432n);
        const back = zoom(zoom(v, anchor, factor, EXT), anchor, 1 / factor, EXT);
        const diff = span(back) - span(v);
        expect(diff <= 1n && diff >= -1n, `factor ${factor} anchor ${anchor}`).toBe(true);
      }
    }
  });

  it("never drops below one nanosecond per pixel", () => {
    const v = vp(5000n, 6500n);
    const out = zoom(v, 500, 10, EXT);
    expect(span(out)).toBe(1000n);
    // and zooming further in from there is a no-op
    expect(zoom(out, 500, 2, EXT)).toBe(out);
  });
});

describe("rationalize", () => {
  it("recovers exact fractions from their float form", () => {
    expect(rationalize(2)).toEqual({ num: 2n, den: 1n });
    expect(rationalize(0.5)).toEqual({ num: 1n, den: 2n });
    expect(rationalize(1.5)).toEqual({ num: 3n, den: 2n });
    expect(rationalize(1 / 1.5)).toEqual({ num: 2n, den: 3n });
    expect(rationalize(1.25)).toEqual({ num: 5n, den: 4n });
    expect(rationalize(0.8)).toEqual({ num: 4n, den: 5n });
  });

  it("approximates irrationals closely", () => {
    const { num, den } = rationalize(Math.SQRT2);
    expect(Math.abs(Number(num) / Number(den) - Math.SQRT2)).toBeLessThan(1e-9);
  });
});

describe("clamp and resize", () => {
  it("a window larger than the extent collapses to the extent", () => {
    const v = vp(-5n, 20_000_000n);
    const out = clampToExtent(v, EXT);
    expect(out.begin).toBe(EXT.begin);
    expect(out.end).toBe(EXT.end);
  });

  it("clamping an in-range window is the identity object", () => {
    const v = vp(10n, 1000n);
    expect(clampToExtent(v, EXT)).toBe(v);
  });

  it("resize keeps the window and updates the width", () => {
    const v = vp(0n, 8000n);
    const out = resize(v, 500, EXT);
    expect(out.canvasPx).toBe(500);
    expect(out.begin).toBe(0n);
    expect(out.end).toBe(8000n);
  });

  it("resize grows a too-small span to one ns per pixel", () => {
    const v = vp(100n, 700n, 600);
    const out = resize(v, 2000, EXT);
    expect(span(out)).toBe(2000n);
  });
});

describe("columnOfTime", () => {
  it("is the floor affine map the server uses", () => {
    const v = vp(1000n, 2000n, 100); // 10 ns per column
    expect(columnOfTime(v, 1000n)).toBe(0);
    expect(columnOfTime(v, 1009n)).toBe(0);
    expect(columnOfTime(v, 1010n)).toBe(1);
    expect(columnOfTime(v, 1999n)).toBe(99);
  });
});
