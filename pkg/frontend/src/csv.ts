/** Parsers for the report CSV contracts consumed by the dashboard. */

import type { CdfPoint, IntervalRow } from "./types.js";

function splitLines(text: string): string[] {
  return text.split(/\r?\n/).filter((line) => line.length > 0);
}

/** intervals.csv: comparison,n,mean,lo,hi */
export function parseIntervalsCsv(text: string): IntervalRow[] {
  const lines = splitLines(text);
  if (lines[0] !== "comparison,n,mean,lo,hi") {
    throw new Error(`unexpected intervals header: ${lines[0]}`);
  }
  return lines.slice(1).map((line) => {
    const [comparison, n, mean, lo, hi] = line.split(",");
    if (!comparison || !n || !mean || !lo || !hi) {
      throw new Error(`malformed intervals row: ${line}`);
    }
    return {
      comparison,
      n: Number(n),
      mean: Number(mean),
      lo: Number(lo),
      hi: Number(hi),
    };
  });
}

/** cdf_*.csv: kind,x,F -> one point list per forecast kind. */
export function parseCdfCsv(text: string): Map<string, CdfPoint[]> {
  const lines = splitLines(text);
  if (lines[0] !== "kind,x,F") {
    throw new Error(`unexpected cdf header: ${lines[0]}`);
  }
  const byKind = new Map<string, CdfPoint[]>();
  for (const line of lines.slice(1)) {
    const [kind, x, F] = line.split(",");
    if (!kind || x === undefined || F === undefined) {
      throw new Error(`malformed cdf row: ${line}`);
    }
    const points = byKind.get(kind) ?? [];
    points.push({ x: Number(x), F: Number(F) });
    byKind.set(kind, points);
  }
  for (const [kind, points] of byKind) {
    for (let i = 1; i < points.length; i++) {
      if (points[i]!.F < points[i - 1]!.F) {
        throw new Error(`cdf for ${kind} is not monotone at x=${points[i]!.x}`);
      }
    }
  }
  return byKind;
}
