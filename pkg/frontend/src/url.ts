/** Shareable view state in the URL hash:
 * #dataset=d&begin=0&end=100&pw=1&builder=1dkdt&attr=kind&value=op_1
 */

import type { Filter, Viewport } from "./viewport.js";

export interface ViewState {
  dataset: string;
  begin: bigint;
  end: bigint;
  pixelWindow: number;
  builder: string;
  filter: Filter | null;
}

export function encodeState(s: ViewState): string {
  const qs = new URLSearchParams({
    dataset: s.dataset,
    begin: s.begin.toString(),
    end: s.end.toString(),
    pw: String(s.pixelWindow),
    builder: s.builder,
  });
  if (s.filter) {
    qs.set("attr", s.filter.attr);
    qs.set("value", s.filter.value);
  }
  return qs.toString();
}

export function decodeState(hash: string): ViewState | null {
  const qs = new URLSearchParams(hash.replace(/^#/, ""));
  const dataset = qs.get("dataset");
  const begin = qs.get("begin");
  const end = qs.get("end");
  if (!dataset || begin === null || end === null) return null;
  let b: bigint;
  let e: bigint;
  try {
    b = BigInt(begin);
    e = BigInt(end);
  } catch {
    return null;
  }
  if (b >= e) return null;
  const pw = Number(qs.get("pw") ?? "1");
  const attr = qs.get("attr");
  const value = qs.get("value");
  return {
    dataset,
    begin: b,
    end: e,
    pixelWindow: Number.isInteger(pw) && pw >= 1 ? pw : 1,
    builder: qs.get("builder") ?? "1dkdt",
    filter: attr !== null && value !== null ? { attr, value } : null,
  };
}

export function stateOf(dataset: string, v: Viewport, builder: string): ViewState {
  return {
    dataset,
    begin: v.begin,
    end: v.end,
    pixelWindow: v.pixelWindow,
    builder,
    filter: v.filter,
  };
}
