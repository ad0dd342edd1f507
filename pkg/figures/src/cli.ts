#!/usr/bin/env node
/**
 * figures <kind> --in <results.csv> [--summary <summary.json>] --out <path>
 *               [--scenario <id>]
 *
 * Kinds: disagreement-curve | rmse-panel | misclass-panel | sensitivity-table
 */

import { FIGURE_KINDS, FigureKind, FigureSpec, render } from "./render.js";

function usage(): string {
  return (
    "usage: figures <kind> --in <results.csv> [--summary <summary.json>] " +
    `--out <path> [--scenario <id>]\n  kinds: ${FIGURE_KINDS.join(", ")}`
  );
}

export function parseArgs(argv: string[]): FigureSpec {
  if (argv.length === 0) throw new Error(usage());
  const kind = argv[0] as FigureKind;
  if (!FIGURE_KINDS.includes(kind)) {
    throw new Error(`unknown figure kind '${argv[0]}'\n${usage()}`);
  }
  const flags: Record<string, string> = {};
  for (let i = 1; i < argv.length; i += 2) {
    const name = argv[i];
    const value = argv[i + 1];
    if (!name.startsWith("--") || value === undefined) {
      throw new Error(usage());
    }
    flags[name.slice(2)] = value;
  }
  const allowed = new Set(["in", "summary", "out", "scenario"]);
  for (const name of Object.keys(flags)) {
    if (!allowed.has(name)) throw new Error(`unknown flag --${name}\n${usage()}`);
  }
  if (!flags["in"] || !flags["out"]) throw new Error(usage());
  return {
    kind,
    input: flags["in"],
    summary: flags["summary"],
    output: flags["out"],
    scenario: flags["scenario"],
  };
}

export function main(argv: string[]): number {
  try {
    render(parseArgs(argv));
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
