/**
 * Minimal deterministic SVG chart construction: one fixed layout, numeric
 * formatting pinned to six decimals, no timestamps or generated ids, so a
 * fixed input always produces byte-identical output.
 */

import { PointStat } from "./aggregate.js";

export const WIDTH = 640;
export const HEIGHT = 420;
const MARGIN = { left: 64, right: 160, top: 36, bottom: 52 };

export const METHOD_STYLE: Record<string, { color: string; label: string }> = {
  sepl: { color: "#4c72b0", label: "SepL" },
  fitr_ramp: { color: "#dd8452", label: "FITR-Ramp" },
  fitr_intl: { color: "#55a868", label: "FITR-IntL" },
};

const fmt = (v: number): string => (Math.round(v * 1e6) / 1e6).toFixed(6);

export interface Series {
  method: string;
  points: PointStat[];
  errorBars: boolean;
}

/** Ratios are plotted on an ordinal axis; Infinity renders as the last slot. */
function ratioPositions(ratios: number[]): Map<number, number> {
  const inner = WIDTH - MARGIN.left - MARGIN.right;
  const step = ratios.length > 1 ? inner / (ratios.length - 1) : 0;
  const map = new Map<number, number>();
  ratios.forEach((r, i) => {
    map.set(r, MARGIN.left + (ratios.length > 1 ? i * step : inner / 2));
  });
  return map;
}

export function ratioLabel(ratio: number): string {
  return ratio === Infinity ? "inf" : `${ratio}`;
}

export function renderCurveChart(options: {
  title: string;
  yLabel: string;
  series: Series[];
  reference?: number;
  referenceLabel?: string;
}): string {
  const { title, yLabel, series, reference, referenceLabel } = options;
  const ratios = [...new Set(series.flatMap((s) => s.points.map((p) => p.ratio)))].sort(
    (a, b) => a - b,
  );
  const xOf = ratioPositions(ratios);

  const yValues = series.flatMap((s) =>
    s.points.flatMap((p) => [p.mean - p.sd, p.mean + p.sd]),
  );
  if (reference !== undefined) yValues.push(reference);
  let yMin = Math.min(...yValues, 0);
  let yMax = Math.max(...yValues);
  if (yMax === yMin) yMax = yMin + 1;
  const pad = 0.08 * (yMax - yMin);
  yMin = Math.max(0, yMin - pad / 2);
  yMax += pad;
  const yOf = (v: number) =>
    HEIGHT - MARGIN.bottom - ((v - yMin) / (yMax - yMin)) * (HEIGHT - MARGIN.top - MARGIN.bottom);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="22" text-anchor="middle" font-size="15">${title}</text>`,
  );

  // axes
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const yBase = HEIGHT - MARGIN.bottom;
  parts.push(`<line x1="${x0}" y1="${yBase}" x2="${x1}" y2="${yBase}" stroke="black"/>`);
  parts.push(`<line x1="${x0}" y1="${MARGIN.top}" x2="${x0}" y2="${yBase}" stroke="black"/>`);
  for (const r of ratios) {
    const x = xOf.get(r)!;
    parts.push(`<line x1="${fmt(x)}" y1="${yBase}" x2="${fmt(x)}" y2="${yBase + 5}" stroke="black"/>`);
    parts.push(
      `<text x="${fmt(x)}" y="${yBase + 20}" text-anchor="middle" font-size="12">${ratioLabel(r)}</text>`,
    );
  }
  parts.push(
    `<text x="${(x0 + x1) / 2}" y="${HEIGHT - 12}" text-anchor="middle" font-size="13">external sample ratio N/n</text>`,
  );
  for (let i = 0; i <= 4; i++) {
    const v = yMin + ((yMax - yMin) * i) / 4;
    const y = yOf(v);
    parts.push(`<line x1="${x0 - 5}" y1="${fmt(y)}" x2="${x0}" y2="${fmt(y)}" stroke="black"/>`);
    parts.push(
      `<text x="${x0 - 9}" y="${fmt(y + 4)}" text-anchor="end" font-size="11">${fmt(v)}</text>`,
    );
  }
  parts.push(
    `<text x="16" y="${(MARGIN.top + yBase) / 2}" font-size="13" transform="rotate(-90 16 ${(MARGIN.top + yBase) / 2})" text-anchor="middle">${yLabel}</text>`,
  );

  if (reference !== undefined) {
    const y = fmt(yOf(reference));
    parts.push(
      `<line x1="${x0}" y1="${y}" x2="${x1}" y2="${y}" stroke="#444444" stroke-dasharray="6 4" class="reference-line"/>`,
    );
    if (referenceLabel) {
      parts.push(
        `<text x="${x1 - 4}" y="${fmt(yOf(reference) - 6)}" text-anchor="end" font-size="11" fill="#444444">${referenceLabel}</text>`,
      );
    }
  }

  for (const s of series) {
    const style = METHOD_STYLE[s.method] ?? { color: "#333333", label: s.method };
    const coords = s.points.map((p) => `${fmt(xOf.get(p.ratio)!)},${fmt(yOf(p.mean))}`);
    if (coords.length > 1) {
      parts.push(
        `<polyline points="${coords.join(" ")}" fill="none" stroke="${style.color}" stroke-width="2"/>`,
      );
    }
    for (const p of s.points) {
      const x = xOf.get(p.ratio)!;
      if (s.errorBars && p.sd > 0) {
        parts.push(
          `<line x1="${fmt(x)}" y1="${fmt(yOf(p.mean - p.sd))}" x2="${fmt(x)}" y2="${fmt(yOf(p.mean + p.sd))}" stroke="${style.color}" stroke-width="1.5" class="error-bar"/>`,
        );
        for (const end of [p.mean - p.sd, p.mean + p.sd]) {
          parts.push(
            `<line x1="${fmt(x - 4)}" y1="${fmt(yOf(end))}" x2="${fmt(x + 4)}" y2="${fmt(yOf(end))}" stroke="${style.color}" stroke-width="1.5"/>`,
          );
        }
      }
      parts.push(
        `<circle cx="${fmt(x)}" cy="${fmt(yOf(p.mean))}" r="3.5" fill="${style.color}" data-method="${s.method}" data-ratio="${ratioLabel(p.ratio)}" data-mean="${fmt(p.mean)}" data-sd="${fmt(p.sd)}"/>`,
      );
    }
  }

  // legend
  let ly = MARGIN.top + 8;
  for (const s of series) {
    const style = METHOD_STYLE[s.method] ?? { color: "#333333", label: s.method };
    parts.push(
      `<line x1="${x1 + 12}" y1="${ly - 4}" x2="${x1 + 34}" y2="${ly - 4}" stroke="${style.color}" stroke-width="2"/>`,
    );
    parts.push(`<text x="${x1 + 40}" y="${ly}" font-size="12">${style.label}</text>`);
    ly += 20;
  }
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
