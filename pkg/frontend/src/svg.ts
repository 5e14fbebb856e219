/** Client-side SVG builders for the facilitator plots.
 *
 * Pure string generation from the parsed CSV structures; no canvas, no
 * server rendering.
 */

import type { CdfPoint, IntervalRow } from "./types.js";

const WIDTH = 640;
const HEIGHT_PER_ROW = 28;
const MARGIN = { left: 220, right: 30, top: 24, bottom: 34 };

function fmt(value: number): string {
  return value.toFixed(2);
}

/** Horizontal forest plot of paired-difference credible intervals. */
export function forestSvg(rows: IntervalRow[]): string {
  if (rows.length === 0) {
    return `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="60"><text x="10" y="30">no comparisons</text></svg>`;
  }
  const height = MARGIN.top + MARGIN.bottom + rows.length * HEIGHT_PER_ROW;
  const span = Math.max(...rows.map((r) => Math.max(Math.abs(r.lo), Math.abs(r.hi)))) || 1;
  const innerWidth = WIDTH - MARGIN.left - MARGIN.right;
  const xOf = (v: number) => MARGIN.left + ((v + span) / (2 * span)) * innerWidth;

  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${height}" class="forest-plot">`,
    `<line x1="${xOf(0)}" y1="${MARGIN.top - 8}" x2="${xOf(0)}" y2="${height - MARGIN.bottom + 8}" stroke="#999" stroke-dasharray="4 3"/>`,
  ];
  rows.forEach((row, i) => {
    const y = MARGIN.top + i * HEIGHT_PER_ROW + HEIGHT_PER_ROW / 2;
    parts.push(
      `<text x="${MARGIN.left - 10}" y="${y + 4}" text-anchor="end" font-size="11">${row.comparison}</text>`,
      `<line x1="${xOf(row.lo)}" y1="${y}" x2="${xOf(row.hi)}" y2="${y}" stroke="#2b6cb0" stroke-width="2" data-lo="${row.lo.toFixed(6)}" data-hi="${row.hi.toFixed(6)}"/>`,
      `<circle cx="${xOf(row.mean)}" cy="${y}" r="4" fill="#2b6cb0" data-mean="${row.mean.toFixed(6)}"/>`,
    );
  });
  parts.push(
    `<text x="${xOf(-span)}" y="${height - 10}" font-size="10">${fmt(-span)}</text>`,
    `<text x="${xOf(0)}" y="${height - 10}" font-size="10" text-anchor="middle">0</text>`,
    `<text x="${xOf(span)}" y="${height - 10}" font-size="10" text-anchor="end">${fmt(span)}</text>`,
    `</svg>`,
  );
  return parts.join("");
}

/** Step plot of one or more empirical score CDFs. */
export function stepSvg(curves: Map<string, CdfPoint[]>, height = 320): string {
  const innerWidth = WIDTH - 70 - 20;
  const innerHeight = height - 30 - 30;
  const xOf = (x: number) => 70 + x * innerWidth;
  const yOf = (F: number) => 30 + (1 - F) * innerHeight;

  const colors = ["#000000", "#777777", "#c53030", "#2b6cb0", "#2f855a", "#dd6b20"];
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${height}" class="cdf-plot">`,
    `<rect x="70" y="30" width="${innerWidth}" height="${innerHeight}" fill="none" stroke="#ccc"/>`,
  ];
  let colorIndex = 0;
  for (const [kind, points] of [...curves.entries()].sort((a, b) => a[0].localeCompare(b[0]))) {
    const color = colors[colorIndex % colors.length]!;
    colorIndex += 1;
    let d = `M ${xOf(0)} ${yOf(0)}`;
    let lastF = 0;
    for (const point of points) {
      d += ` L ${xOf(point.x)} ${yOf(lastF)} L ${xOf(point.x)} ${yOf(point.F)}`;
      lastF = point.F;
    }
    d += ` L ${xOf(1)} ${yOf(lastF)}`;
    parts.push(
      `<path d="${d}" fill="none" stroke="${color}" stroke-width="1.5" data-kind="${kind}"/>`,
      `<text x="${WIDTH - 15}" y="${40 + colorIndex * 14}" text-anchor="end" font-size="10" fill="${color}">${kind}</text>`,
    );
  }
  parts.push(
    `<text x="70" y="${height - 8}" font-size="10">0</text>`,
    `<text x="${xOf(1)}" y="${height - 8}" font-size="10" text-anchor="end">1</text>`,
    `<text x="${WIDTH / 2}" y="${height - 8}" font-size="10" text-anchor="middle">Brier score</text>`,
    `</svg>`,
  );
  return parts.join("");
}
