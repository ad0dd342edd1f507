/**
 * Mean/sd aggregation of result rows.
 *
 * This module is the only place statistics are computed; the renderers
 * consume its output verbatim, so a spreadsheet aggregation of the same CSV
 * must reproduce every number that appears in a figure.
 */

import { ResultRow } from "./csv.js";

export interface PointStat {
  ratio: number;
  mean: number;
  sd: number;
  count: number;
}

export type Metric = "disagreementK2" | "misclassification" | "valueGap";

export function mean(values: number[]): number {
  if (values.length === 0) throw new Error("mean of empty list");
  return values.reduce((a, b) => a + b, 0) / values.length;
}

/** Population standard deviation (matches the benchmark summaries). */
export function sd(values: number[]): number {
  const m = mean(values);
  return Math.sqrt(mean(values.map((v) => (v - m) ** 2)));
}

export function rmse(values: number[]): number {
  return Math.sqrt(mean(values.map((v) => v * v)));
}

export const METHOD_ORDER = ["sepl", "fitr_ramp", "fitr_intl"] as const;

export function methodsIn(rows: ResultRow[]): string[] {
  const present = new Set(rows.map((r) => r.method));
  const ordered = METHOD_ORDER.filter((m) => present.has(m));
  for (const m of present) if (!ordered.includes(m as never)) ordered.push(m as never);
  return ordered as string[];
}

export function ratiosIn(rows: ResultRow[]): number[] {
  return [...new Set(rows.map((r) => r.ratio))].sort((a, b) => a - b);
}

/** Mean and sd of a metric against the external-size ratio, per method. */
export function curveByRatio(
  rows: ResultRow[],
  method: string,
  metric: Metric,
): PointStat[] {
  return ratiosIn(rows).flatMap((ratio) => {
    const values = rows
      .filter((r) => r.method === method && r.ratio === ratio)
      .map((r) => r[metric] as number);
    if (values.length === 0) return [];
    return [{ ratio, mean: mean(values), sd: sd(values), count: values.length }];
  });
}

/** Root-mean-square value gap against the ratio, per method. */
export function rmseByRatio(rows: ResultRow[], method: string): PointStat[] {
  return ratiosIn(rows).flatMap((ratio) => {
    const values = rows
      .filter((r) => r.method === method && r.ratio === ratio)
      .map((r) => r.valueGap);
    if (values.length === 0) return [];
    return [{ ratio, mean: rmse(values), sd: 0, count: values.length }];
  });
}

export interface SensitivityRow {
  rho: number;
  method: string;
  agreementMean: number;
  agreementSd: number;
  rmse: number;
  rmseRatio: number;
  misclassificationMean: number;
  misclassificationSd: number;
  count: number;
}

function rhoOf(scenario: string): number {
  const match = /^SENS:(.+)$/.exec(scenario);
  if (!match) throw new Error(`not a sensitivity scenario id: '${scenario}'`);
  return Number(match[1]);
}

/** Per-(rho, method) aggregates mirroring the sensitivity table columns. */
export function sensitivityTable(rows: ResultRow[]): SensitivityRow[] {
  const rhos = [...new Set(rows.map((r) => rhoOf(r.scenario)))].sort((a, b) => b - a);
  const out: SensitivityRow[] = [];
  for (const rho of rhos) {
    const atRho = rows.filter((r) => rhoOf(r.scenario) === rho);
    const seplRmse = rmse(atRho.filter((r) => r.method === "sepl").map((r) => r.valueGap));
    for (const method of methodsIn(atRho)) {
      const sub = atRho.filter((r) => r.method === method);
      const agreement = sub.map((r) => 1 - r.disagreementK2);
      const mis = sub.map((r) => r.misclassification);
      const gapRmse = rmse(sub.map((r) => r.valueGap));
      out.push({
        rho,
        method,
        agreementMean: mean(agreement),
        agreementSd: sd(agreement),
        rmse: gapRmse,
        rmseRatio: gapRmse / seplRmse,
        misclassificationMean: mean(mis),
        misclassificationSd: sd(mis),
        count: sub.length,
      });
    }
  }
  return out;
}
