/** Wire shapes of the query server's JSON responses. */

export interface TimeSpanWire {
  begin: number;
  end: number;
}

export interface DatasetDescriptor {
  name: string;
  tracks: number;
  events: number;
  time_extent: TimeSpanWire;
  builders: string[];
  attr_schema: Record<string, "categorical" | "numeric">;
}

export interface NumericSummaryWire {
  min: number;
  max: number;
  mean: number;
  count: number;
}

export interface SliceAttrs {
  categorical?: Record<string, string[]>;
  numeric?: Record<string, NumericSummaryWire>;
}

/** One query result element: a time/track rectangle with aggregates.
 * `exact` slices are single events and carry their `id`. */
export interface WireSlice {
  track_lo: number;
  track_hi: number;
  begin: number;
  end: number;
  count: number;
  exact: boolean;
  end_mark: boolean;
  id?: number;
  attrs?: SliceAttrs;
}

export interface QueryStats {
  fetch_ns: number;
  nodes: number;
  hits: number;
  bytes: number;
}

export interface QueryResponse {
  slices: WireSlice[];
  stats: QueryStats;
}

/** GET /raster: occupied pixel columns keyed by track index (as a string). */
export type RasterMap = Record<string, number[]>;

export interface ErrorBody {
  error: string;
}
