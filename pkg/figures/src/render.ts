/**
 * The four figure kinds built from a results CSV (plus the run summary for
 * reference lines): disagreement and misclassification curves with error
 * bars, the RMSE panel, and the sensitivity table in Markdown.
 */

import { writeFileSync } from "node:fs";

import {
  curveByRatio,
  methodsIn,
  rmseByRatio,
  sensitivityTable,
} from "./aggregate.js";
import { ResultRow, readResultsCsv, readSummaryJson } from "./csv.js";
import { Series, renderCurveChart } from "./svg.js";

export const FIGURE_KINDS = [
  "disagreement-curve",
  "rmse-panel",
  "misclass-panel",
  "sensitivity-table",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface FigureSpec {
  kind: FigureKind;
  input: string;
  summary?: string;
  output: string;
  scenario?: string;
}

function filterScenario(rows: ResultRow[], scenario?: string): ResultRow[] {
  if (!scenario) return rows;
  const filtered = rows.filter((r) => r.scenario === scenario);
  if (filtered.length === 0) {
    throw new Error(`no rows for scenario '${scenario}'`);
  }
  return filtered;
}

function trueDisagreement(summaryPath?: string): number | undefined {
  if (!summaryPath) return undefined;
  const summary = readSummaryJson(summaryPath);
  const block = summary["true_disagreement"] as Record<string, number> | undefined;
  return block?.["k2"];
}

export function disagreementCurveSvg(rows: ResultRow[], reference?: number): string {
  const series: Series[] = methodsIn(rows).map((method) => ({
    method,
    points: curveByRatio(rows, method, "disagreementK2"),
    errorBars: true,
  }));
  return renderCurveChart({
    title: "Disagreement with the secondary optimal rule",
    yLabel: "disagreement rate",
    series,
    reference,
    referenceLabel: reference !== undefined ? "true disagreement" : undefined,
  });
}

export function rmsePanelSvg(rows: ResultRow[]): string {
  const series: Series[] = methodsIn(rows).map((method) => ({
    method,
    points: rmseByRatio(rows, method),
    errorBars: false,
  }));
  return renderCurveChart({
    title: "Value-function RMSE against the optimal rule",
    yLabel: "RMSE",
    series,
  });
}

export function misclassPanelSvg(rows: ResultRow[]): string {
  const series: Series[] = methodsIn(rows).map((method) => ({
    method,
    points: curveByRatio(rows, method, "misclassification"),
    errorBars: true,
  }));
  return renderCurveChart({
    title: "Misclassification against the primary optimal rule",
    yLabel: "misclassification rate",
    series,
  });
}

const fmt6 = (v: number): string => v.toFixed(6);

export function sensitivityTableMarkdown(rows: ResultRow[]): string {
  const table = sensitivityTable(rows);
  const lines = [
    "| rho | method | agreement (sd) | RMSE | RMSE ratio | misclassification (sd) |",
    "| --- | --- | --- | --- | --- | --- |",
  ];
  for (const row of table) {
    lines.push(
      `| ${row.rho} | ${row.method} | ${fmt6(row.agreementMean)} (${fmt6(row.agreementSd)}) | ` +
        `${fmt6(row.rmse)} | ${fmt6(row.rmseRatio)} | ` +
        `${fmt6(row.misclassificationMean)} (${fmt6(row.misclassificationSd)}) |`,
    );
  }
  return lines.join("\n") + "\n";
}

export function render(spec: FigureSpec): string {
  const rows = filterScenario(readResultsCsv(spec.input), spec.scenario);
  let content: string;
  switch (spec.kind) {
    case "disagreement-curve":
      content = disagreementCurveSvg(rows, trueDisagreement(spec.summary));
      break;
    case "rmse-panel":
      content = rmsePanelSvg(rows);
      break;
    case "misclass-panel":
      content = misclassPanelSvg(rows);
      break;
    case "sensitivity-table":
      content = sensitivityTableMarkdown(rows);
      break;
    default:
      throw new Error(`unknown figure kind '${spec.kind satisfies never}'`);
  }
  writeFileSync(spec.output, content, "utf-8");
  return content;
}
