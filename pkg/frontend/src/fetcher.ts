/** Debounced latest-wins query issuing.
 *
 * Continuous gestures call request() on every tick; a trailing 16 ms
 * debounce coalesces them into one query. Issuing a new query aborts the
 * in-flight one, and a response is applied only while it is still the most
 * recently issued query, so a stale answer can never paint over a newer
 * one no matter how the network reorders completions.
 */

import type { QueryResponse } from "./types.js";
import { paramsEqual, type QueryParams } from "./api.js";

export type Transport = (p: QueryParams, signal: AbortSignal) => Promise<QueryResponse>;

export interface LoopHooks {
  onApply: (resp: QueryResponse, params: QueryParams, seq: number) => void;
  onError?: (err: unknown, params: QueryParams) => void;
  /** Fires when a query leaves or a response settles; drives a busy flag. */
  onBusy?: (inFlight: boolean) => void;
}

export const DEBOUNCE_MS = 16;

export class QueryLoop {
  private desired: QueryParams | null = null;
  private applied: QueryParams | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private controller: AbortController | null = null;
  private issued = 0;

  constructor(
    private readonly transport: Transport,
    private readonly hooks: LoopHooks,
    private readonly debounceMs: number = DEBOUNCE_MS,
  ) {}

  /** Ask for this query soon; repeated calls within the debounce window
   * collapse to the newest parameters. */
  request(params: QueryParams): void {
    if (
      this.desired === null &&
      this.controller === null &&
      this.applied !== null &&
      paramsEqual(params, this.applied)
    ) {
      return; // already showing exactly this answer
    }
    this.desired = params;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      this.issue();
    }, this.debounceMs);
  }

  /** Skip the debounce (initial load, tests). */
  flush(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    this.issue();
  }

  inFlight(): boolean {
    return this.controller !== null;
  }

  lastIssuedSeq(): number {
    return this.issued;
  }

  private issue(): void {
    const params = this.desired;
    if (params === null) return;
    this.desired = null;

    if (this.controller !== null) this.controller.abort();
    const controller = new AbortController();
    this.controller = controller;
    const seq = ++this.issued;
    this.hooks.onBusy?.(true);

    this.transport(params, controller.signal).then(
      (resp) => {
        if (seq !== this.issued) return; // superseded while in flight
        this.controller = null;
        this.applied = params;
        this.hooks.onBusy?.(false);
        this.hooks.onApply(resp, params, seq);
      },
      (err) => {
        if (seq !== this.issued) return; // abort of a superseded query
        this.controller = null;
        this.hooks.onBusy?.(false);
        this.hooks.onError?.(err, params);
      },
    );
  }
}
