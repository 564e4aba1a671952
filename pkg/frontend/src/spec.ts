/**
 * Figure specs: a small JSON document naming the figure kind, the input
 * CSVs, and the output image path.  Example:
 *
 *   {
 *     "kind": "ancestor-curves",
 *     "inputs": { "exact": "out/exact_table.csv",
 *                 "recursion": "out/recursion_table.csv" },
 *     "output": "figures/ancestors.svg",
 *     "options": { "widths": [5, 10, 20] }
 *   }
 */

import { existsSync, mkdirSync, readFileSync, writeFileSync } from "fs";
import { dirname } from "path";

import { readCsv } from "./csv.js";
import {
  renderAncestorCurves,
  renderSharedDistricts,
  renderWeightHistogram,
} from "./figures.js";

export interface FigureSpec {
  kind: string;
  inputs: Record<string, string>;
  output: string;
  options?: Record<string, unknown>;
}

export const KINDS = ["ancestor-curves", "shared-districts", "weight-histogram"];

const REQUIRED_INPUTS: Record<string, string[]> = {
  "ancestor-curves": ["exact", "recursion"],
  "shared-districts": ["gdj"],
  "weight-histogram": ["weights"],
};

export function loadSpec(path: string): FigureSpec {
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(path, "utf-8"));
  } catch (err) {
    throw new Error(`${path}: not a readable JSON spec (${(err as Error).message})`);
  }
  const spec = raw as Partial<FigureSpec>;
  if (typeof spec.kind !== "string" || typeof spec.output !== "string") {
    throw new Error(`${path}: a figure spec needs string 'kind' and 'output' fields`);
  }
  if (typeof spec.inputs !== "object" || spec.inputs === null) {
    throw new Error(`${path}: a figure spec needs an 'inputs' object`);
  }
  return spec as FigureSpec;
}

export function renderSpec(spec: FigureSpec): string {
  if (!KINDS.includes(spec.kind)) {
    throw new Error(`unknown figure kind '${spec.kind}'; known: ${KINDS.join(", ")}`);
  }
  for (const name of REQUIRED_INPUTS[spec.kind]) {
    const path = spec.inputs[name];
    if (!path) {
      throw new Error(`figure kind '${spec.kind}' needs input '${name}'`);
    }
    if (!existsSync(path)) {
      throw new Error(`input '${name}' not found: ${path}`);
    }
  }
  const options = spec.options ?? {};
  let svg: string;
  if (spec.kind === "ancestor-curves") {
    const widths = (options.widths as number[] | undefined) ?? [];
    svg = renderAncestorCurves(
      readCsv(spec.inputs.exact),
      readCsv(spec.inputs.recursion),
      { widths },
    );
  } else if (spec.kind === "shared-districts") {
    svg = renderSharedDistricts(readCsv(spec.inputs.gdj), {
      perRow: options.perRow as number | undefined,
    });
  } else {
    svg = renderWeightHistogram(readCsv(spec.inputs.weights), {
      generation: options.generation as number | undefined,
      bins: options.bins as number | undefined,
    });
  }
  mkdirSync(dirname(spec.output), { recursive: true });
  writeFileSync(spec.output, svg, "utf-8");
  return spec.output;
}
