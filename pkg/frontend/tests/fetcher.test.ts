import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import type { QueryParams } from "../src/api.js";
import { QueryLoop } from "../src/fetcher.js";
import type { QueryResponse } from "../src/types.js";

interface Pending {
  params: QueryParams;
  signal: AbortSignal;
  resolve: (r: QueryResponse) => void;
  reject: (e: unknown) => void;
}

function makeParams(begin: bigint): QueryParams {
  return {
    dataset: "d",
    begin,
    end: begin + 1000n,
    trackLo: 0,
    trackHi: 3,
    canvasPx: 400,
    pixelWindow: 1,
    builder: "1dkdt",
  };
}

function makeResponse(tag: number): QueryResponse {
  return { slices: [], stats: { fetch_ns: tag, nodes: 0, hits: 0, bytes: 0 } };
}

function harness() {
  const pending: Pending[] = [];
  const applied: Array<{ params: QueryParams; tag: number }> = [];
  const errors: unknown[] = [];
  const loop = new QueryLoop(
    (params, signal) =>
      new Promise<QueryResponse>((resolve, reject) => {
        pending.push({ params, signal, resolve, reject });
      }),
    {
      onApply: (resp, params) => applied.push({ params, tag: resp.stats.fetch_ns }),
      onError: (err) => errors.push(err),
    },
  );
  return { loop, pending, applied, errors };
}

// resolve() callbacks run as microtasks; this lets them settle
const settle = () => Promise.resolve().then(() => Promise.resolve());

beforeEach(() => {
  vi.useFakeTimers();
});

afterEach(() => {
  vi.useRealTimers();
});

describe("QueryLoop", () => {
  it("coalesces rapid requests into one query for the newest params", () => {
    const { loop, pending } = harness();
    loop.request(makeParams(0n));
    vi.advanceTimersByTime(10);
    loop.request(makeParams(100n));
    vi.advanceTimersByTime(10);
    loop.request(makeParams(200n));
    vi.advanceTimersByTime(16);
    expect(pending.length).toBe(1);
    expect(pending[0].params.begin).toBe(200n);
  });

  it("waits out the debounce before issuing", () => {
    const { loop, pending } = harness();
    loop.request(makeParams(0n));
    vi.advanceTimersByTime(15);
    expect(pending.length).toBe(0);
    vi.advanceTimersByTime(1);
    expect(pending.length).toBe(1);
  });

  it("aborts the in-flight query when a newer one issues", () => {
    const { loop, pending } = harness();
    loop.request(makeParams(0n));
    vi.advanceTimersByTime(16);
    loop.request(makeParams(500n));
    vi.advanceTimersByTime(16);
    expect(pending.length).toBe(2);
    expect(pending[0].signal.aborted).toBe(true);
    expect(pending[1].signal.aborted).toBe(false);
  });

  it("never paints a stale response, even when it arrives late", async () => {
    const { loop, pending, applied } = harness();
    loop.request(makeParams(0n));
    vi.advanceTimersByTime(16);
    loop.request(makeParams(500n));
    vi.advanceTimersByTime(16);

    // the newer response lands first, then the delayed stale one
    pending[1].resolve(makeResponse(2));
    await settle();
    pending[0].resolve(makeResponse(1));
    await settle();

    expect(applied.map((a) => a.tag)).toEqual([2]);
    expect(applied[0].params.begin).toBe(500n);
  });

  it("drops a superseded response that arrives before the newer one", async () => {
    const { loop, pending, applied } = harness();
    loop.request(makeParams(0n));
    vi.advanceTimersByTime(16);
    loop.request(makeParams(500n));
    vi.advanceTimersByTime(16);

    pending[0].resolve(makeResponse(1)); // transport ignored the abort
    await settle();
    expect(applied.length).toBe(0);

    pending[1].resolve(makeResponse(2));
    await settle();
    expect(applied.map((a) => a.tag)).toEqual([2]);
  });

  it("skips the query when the applied answer already matches", async () => {
    const { loop, pending, applied } = harness();
    const params = makeParams(0n);
    loop.request(params);
    vi.advanceTimersByTime(16);
    pending[0].resolve(makeResponse(1));
    await settle();
    expect(applied.length).toBe(1);

    loop.request(makeParams(0n)); // equal params, fresh object
    vi.advanceTimersByTime(16);
    expect(pending.length).toBe(1);
  });

  it("reports errors only for the current query", async () => {
    const { loop, pending, errors } = harness();
    loop.request(makeParams(0n));
    vi.advanceTimersByTime(16);
    loop.request(makeParams(500n));
    vi.advanceTimersByTime(16);

    pending[0].reject(new Error("aborted"));
    await settle();
    expect(errors.length).toBe(0); // superseded failure is not surfaced

    pending[1].reject(new Error("boom"));
    await settle();
    expect(errors.length).toBe(1);
  });

  it("flush issues immediately", () => {
    const { loop, pending } = harness();
    loop.request(makeParams(0n));
    loop.flush();
    expect(pending.length).toBe(1);
    expect(loop.inFlight()).toBe(true);
  });
});
