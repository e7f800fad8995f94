/** Stable color assignment for categorical values: the same string always
 * hashes to the same palette entry, across queries and page loads. */

const PALETTE = [
  "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
  "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
  "#1f77b4", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
  "#e377c2",
];

export const SUMMARY_FILL = "#8899aa";
export const MULTI_VALUE_FILL = "#667788";

function fnv1a(s: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < s.length; i++) {
    h ^= s.charCodeAt(i);
    h = Math.imul(h, 0x01000193);
  }
  return h >>> 0;
}

export function colorFor(value: string): string {
  return PALETTE[fnv1a(value) % PALETTE.length];
}
