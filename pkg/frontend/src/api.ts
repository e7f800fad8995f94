/** Thin typed client for the query server. Every method throws ApiError on
 * a non-2xx answer, carrying the HTTP status and the server's message. */

import type { DatasetDescriptor, ErrorBody, QueryResponse, RasterMap } from "./types.js";
import type { Viewport } from "./viewport.js";

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

export interface QueryParams {
  dataset: string;
  begin: bigint;
  end: bigint;
  trackLo: number;
  trackHi: number;
  canvasPx: number;
  pixelWindow: number;
  builder: string;
  attr?: string;
  value?: string;
  session?: string;
}

export function paramsForViewport(
  dataset: string,
  v: Viewport,
  builder: string,
  session?: string,
): QueryParams {
  return {
    dataset,
    begin: v.begin,
    end: v.end,
    trackLo: v.trackLo,
    trackHi: v.trackHi,
    canvasPx: v.canvasPx,
    pixelWindow: v.pixelWindow,
    builder,
    attr: v.filter?.attr,
    value: v.filter?.value,
    session,
  };
}

export function paramsEqual(a: QueryParams, b: QueryParams): boolean {
  return (
    a.dataset === b.dataset &&
    a.begin === b.begin &&
    a.end === b.end &&
    a.trackLo === b.trackLo &&
    a.trackHi === b.trackHi &&
    a.canvasPx === b.canvasPx &&
    a.pixelWindow === b.pixelWindow &&
    a.builder === b.builder &&
    a.attr === b.attr &&
    a.value === b.value
  );
}

async function getJson<T>(url: string, signal?: AbortSignal): Promise<T> {
  const resp = await fetch(url, { signal });
  if (!resp.ok) {
    let message = `${resp.status} ${resp.statusText}`;
    try {
      const body = (await resp.json()) as ErrorBody;
      if (body.error) message = body.error;
    } catch {
      // non-JSON error body; keep the status line
    }
    throw new ApiError(resp.status, message);
  }
  return (await resp.json()) as T;
}

export class Client {
  constructor(readonly baseUrl: string) {}

  datasets(signal?: AbortSignal): Promise<DatasetDescriptor[]> {
    return getJson(`${this.baseUrl}/datasets`, signal);
  }

  query(p: QueryParams, signal?: AbortSignal): Promise<QueryResponse> {
    const qs = new URLSearchParams({
      dataset: p.dataset,
      begin: p.begin.toString(),
      end: p.end.toString(),
      track_lo: String(p.trackLo),
      track_hi: String(p.trackHi),
      canvas_px: String(p.canvasPx),
      pixel_window: String(p.pixelWindow),
      builder: p.builder,
    });
    if (p.attr !== undefined && p.value !== undefined) {
      qs.set("attr_key", p.attr);
      qs.set("attr_value", p.value);
    }
    if (p.session) qs.set("session", p.session);
    return getJson(`${this.baseUrl}/query?${qs}`, signal);
  }

  /** Server-side ground truth: occupied pixel columns straight from the raw
   * events, for diffing against what the client painted. */
  raster(p: QueryParams, signal?: AbortSignal): Promise<RasterMap> {
    const qs = new URLSearchParams({
      dataset: p.dataset,
      begin: p.begin.toString(),
      end: p.end.toString(),
      track_lo: String(p.trackLo),
      track_hi: String(p.trackHi),
      canvas_px: String(p.canvasPx),
    });
    if (p.attr !== undefined && p.value !== undefined) {
      qs.set("attr_key", p.attr);
      qs.set("attr_value", p.value);
    }
    return getJson(`${this.baseUrl}/raster?${qs}`, signal);
  }
}
