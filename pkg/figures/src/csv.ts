/**
 * Reader for the benchmark results.csv schema.
 *
 * Lines starting with '#' carry run metadata (the manifest hash) and are
 * skipped. Every column of the fixed schema must be present; a missing
 * column is a hard error naming the column so a schema drift is caught
 * before anything is drawn.
 */

import { readFileSync } from "node:fs";

export const RESULT_COLUMNS = [
  "replication_id",
  "scenario",
  "method",
  "kernel",
  "n",
  "ratio",
  "lambda",
  "mu",
  "kappa",
  "value_gap",
  "misclassification",
  "disagreement_k2",
  "disagreement_k3",
  "wall_ms",
  "test_checksum",
] as const;

export interface ResultRow {
  replicationId: number;
  scenario: string;
  method: string;
  kernel: string;
  n: number;
  ratio: number; // Infinity encodes the oracle-rule arm
  lambda: number;
  mu: number;
  kappa: number | null;
  valueGap: number;
  misclassification: number;
  disagreementK2: number;
  disagreementK3: number | null;
  testChecksum: string;
}

export class SchemaError extends Error {}

function parseNumber(raw: string, column: string, line: number): number {
  if (raw === "inf") return Infinity;
  const value = Number(raw);
  if (raw === "" || Number.isNaN(value)) {
    throw new SchemaError(`line ${line}: column '${column}' is not numeric: '${raw}'`);
  }
  return value;
}

function parseOptional(raw: string, column: string, line: number): number | null {
  return raw === "" ? null : parseNumber(raw, column, line);
}

export function parseResultsCsv(text: string): ResultRow[] {
  const lines = text.split("\n").filter((l) => l.length > 0 && !l.startsWith("#"));
  if (lines.length === 0) throw new SchemaError("results csv is empty");
  const header = lines[0].split(",");
  for (const column of RESULT_COLUMNS) {
    if (!header.includes(column)) {
      throw new SchemaError(`missing column '${column}' in results csv`);
    }
  }
  const at = (cells: string[], column: string) => cells[header.indexOf(column)];
  const rows: ResultRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== header.length) {
      throw new SchemaError(`line ${i + 1}: expected ${header.length} fields, got ${cells.length}`);
    }
    rows.push({
      replicationId: parseNumber(at(cells, "replication_id"), "replication_id", i + 1),
      scenario: at(cells, "scenario"),
      method: at(cells, "method"),
      kernel: at(cells, "kernel"),
      n: parseNumber(at(cells, "n"), "n", i + 1),
      ratio: parseNumber(at(cells, "ratio"), "ratio", i + 1),
      lambda: parseNumber(at(cells, "lambda"), "lambda", i + 1),
      mu: parseNumber(at(cells, "mu"), "mu", i + 1),
      kappa: parseOptional(at(cells, "kappa"), "kappa", i + 1),
      valueGap: parseNumber(at(cells, "value_gap"), "value_gap", i + 1),
      misclassification: parseNumber(at(cells, "misclassification"), "misclassification", i + 1),
      disagreementK2: parseNumber(at(cells, "disagreement_k2"), "disagreement_k2", i + 1),
      disagreementK3: parseOptional(at(cells, "disagreement_k3"), "disagreement_k3", i + 1),
      testChecksum: at(cells, "test_checksum"),
    });
  }
  return rows;
}

export function readResultsCsv(path: string): ResultRow[] {
  return parseResultsCsv(readFileSync(path, "utf-8"));
}

export function readSummaryJson(path: string): Record<string, unknown> {
  return JSON.parse(readFileSync(path, "utf-8")) as Record<string, unknown>;
}
