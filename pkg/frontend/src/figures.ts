/**
 * Figure renderers for lineagelab CSV artifacts.
 *
 * Three kinds:
 *   ancestor-curves   -- per-width panels of the exact surviving-ancestor
 *                        expectation vs district count, sandwiched by the
 *                        recursive upper/lower bound curves.
 *   shared-districts  -- per-j histograms of G(D, j), the most final plans
 *                        sharing j drawn districts, across runs.
 *   weight-histogram  -- distribution of resampling weights in one
 *                        generation, relative to uniform selection.
 */

import { numericColumn, requireColumns, Table } from "./csv.js";
import { axes, fmt, histogram, SvgDoc } from "./svg.js";

const EXACT_COLOR = "#2a7e2a";
const UPPER_COLOR = "#e08214";
const LOWER_COLOR = "#7b3294";
const BAR_COLOR = "#4477aa";
const REF_COLOR = "#cc3311";

export interface AncestorCurvesOptions {
  widths: number[];
}

export function renderAncestorCurves(
  exact: Table,
  recursion: Table,
  options: AncestorCurvesOptions,
): string {
  requireColumns(exact, ["S", "k", "A_float"]);
  requireColumns(recursion, ["kind", "S", "i", "value"]);
  const widths = options.widths;
  if (widths.length === 0) {
    throw new Error("ancestor-curves needs at least one width in options.widths");
  }

  const bByIndex = new Map<number, number>();
  for (const row of recursion.rows) {
    if (row.kind === "b") bByIndex.set(Number(row.i), Number(row.value));
  }

  const panelW = 300;
  const panelH = 260;
  const marginX = 58;
  const marginTop = 46;
  const marginBottom = 50;
  const doc = new SvgDoc(
    widths.length * (panelW + marginX) + 20,
    panelH + marginTop + marginBottom,
  );
  doc.text(14, 20, "Expected surviving ancestors vs district count", 14);
  doc.text(14, 36, "exact values (dots) between recursive bounds", 11, "start", "#555");

  widths.forEach((S, panel) => {
    const aByIndex = new Map<number, number>();
    for (const row of recursion.rows) {
      if (row.kind === "a" && Number(row.S) === S) {
        aByIndex.set(Number(row.i), Number(row.value));
      }
    }
    if (aByIndex.size === 0) {
      throw new Error(
        `${recursion.file} has no 'a' rows for width S=${S}; regenerate with that width`,
      );
    }
    const points: Array<[number, number]> = [];
    for (const row of exact.rows) {
      if (Number(row.S) === S) points.push([Number(row.k), Number(row.A_float)]);
    }
    if (points.length === 0) {
      throw new Error(`${exact.file} has no rows for width S=${S}`);
    }
    points.sort((p, q) => p[0] - q[0]);
    const kMax = Math.min(
      points[points.length - 1][0],
      Math.max(...aByIndex.keys()) + 2,
      Math.max(...bByIndex.keys()) + 2,
    );

    const frame = {
      x0: marginX + panel * (panelW + marginX),
      y0: marginTop,
      w: panelW,
      h: panelH,
    };
    const { sx, sy } = axes(
      doc,
      frame,
      [2, kMax],
      [0, S],
      "districts k",
      panel === 0 ? "ancestors" : "",
    );
    const upper: Array<[number, number]> = [];
    const lower: Array<[number, number]> = [];
    for (let k = 2; k <= kMax; k++) {
      upper.push([sx(k), sy(aByIndex.get(k - 2)! * S)]);
      lower.push([sx(k), sy(bByIndex.get(k - 2)! * S)]);
    }
    doc.polyline(upper, UPPER_COLOR);
    doc.polyline(lower, LOWER_COLOR);
    for (const [k, value] of points) {
      if (k <= kMax) doc.circle(sx(k), sy(value), 2.4, EXACT_COLOR);
    }
    doc.text(frame.x0 + frame.w / 2, frame.y0 - 6, `S = ${S}`, 12, "middle");
  });

  const legendY = panelH + marginTop + 44;
  doc.circle(20, legendY - 4, 2.4, EXACT_COLOR);
  doc.text(28, legendY, "exact", 10);
  doc.line(80, legendY - 4, 104, legendY - 4, UPPER_COLOR, 2);
  doc.text(110, legendY, "upper bound", 10);
  doc.line(200, legendY - 4, 224, legendY - 4, LOWER_COLOR, 2);
  doc.text(230, legendY, "lower bound", 10);
  return doc.render();
}

export interface SharedDistrictsOptions {
  perRow?: number;
}

export function renderSharedDistricts(
  gdj: Table,
  options: SharedDistrictsOptions = {},
): string {
  requireColumns(gdj, ["run", "j", "G"]);
  const byJ = new Map<number, number[]>();
  for (const row of gdj.rows) {
    const j = Number(row.j);
    if (!byJ.has(j)) byJ.set(j, []);
    byJ.get(j)!.push(Number(row.G));
  }
  if (byJ.size === 0) {
    throw new Error(`${gdj.file} holds no rows to plot`);
  }
  const js = [...byJ.keys()].sort((a, b) => a - b);
  const perRow = options.perRow ?? 3;
  const panelW = 240;
  const panelH = 170;
  const marginX = 56;
  const marginY = 64;
  const rows = Math.ceil(js.length / perRow);
  const doc = new SvgDoc(
    perRow * (panelW + marginX) + 20,
    rows * (panelH + marginY) + 46,
  );
  doc.text(14, 20, "How many final plans share j drawn districts", 14);

  js.forEach((j, idx) => {
    const values = byJ.get(j)!;
    const gMax = Math.max(...values);
    const frame = {
      x0: marginX + (idx % perRow) * (panelW + marginX),
      y0: 46 + Math.floor(idx / perRow) * (panelH + marginY),
      w: panelW,
      h: panelH,
    };
    const bins = Math.min(Math.max(gMax, 1), 12);
    const { edges, counts } = histogram(values, 0.5, gMax + 0.5, bins);
    const yMax = Math.max(...counts, 1);
    const { sx, sy } = axes(
      doc,
      frame,
      [0, gMax + 1],
      [0, yMax],
      "plans with the block",
      idx % perRow === 0 ? "runs" : "",
    );
    counts.forEach((count, b) => {
      if (count === 0) return;
      const x0 = sx(edges[b]);
      const x1 = sx(edges[b + 1]);
      doc.rect(x0, sy(count), x1 - x0 - 1, sy(0) - sy(count), BAR_COLOR);
    });
    doc.text(frame.x0 + frame.w / 2, frame.y0 - 6, `j = ${j}`, 12, "middle");
  });
  return doc.render();
}

export interface WeightHistogramOptions {
  generation?: number;
  bins?: number;
}

export function renderWeightHistogram(
  weights: Table,
  options: WeightHistogramOptions = {},
): string {
  requireColumns(weights, ["run", "generation", "particle", "prob"]);
  const generations = numericColumn(weights, "generation");
  const target = options.generation ?? Math.max(...generations);
  const groupSize = new Map<string, number>();
  for (const row of weights.rows) {
    if (Number(row.generation) !== target) continue;
    const key = row.run;
    groupSize.set(key, (groupSize.get(key) ?? 0) + 1);
  }
  if (groupSize.size === 0) {
    throw new Error(
      `${weights.file} has no rows for generation ${target}; ` +
        `available: ${[...new Set(generations)].sort((a, b) => a - b).join(", ")}`,
    );
  }
  // relative weight 1 = a particle selected at exactly the uniform rate
  const relative: number[] = [];
  for (const row of weights.rows) {
    if (Number(row.generation) !== target) continue;
    relative.push(Number(row.prob) * groupSize.get(row.run)!);
  }
  const hi = Math.max(...relative, 1.5);
  const bins = options.bins ?? 30;
  const { edges, counts } = histogram(relative, 0, hi, bins);
  const yMax = Math.max(...counts);

  const doc = new SvgDoc(560, 360);
  doc.text(14, 20, `Resampling weight skew, generation ${target}`, 14);
  doc.text(14, 36, "1.0 = uniform selection rate", 11, "start", "#555");
  const frame = { x0: 64, y0: 52, w: 460, h: 240 };
  const { sx, sy } = axes(
    doc,
    frame,
    [0, hi],
    [0, yMax],
    "selection weight relative to uniform",
    "particles",
  );
  counts.forEach((count, b) => {
    if (count === 0) return;
    const x0 = sx(edges[b]);
    const x1 = sx(edges[b + 1]);
    doc.rect(x0, sy(count), Math.max(x1 - x0 - 0.5, 0.5), sy(0) - sy(count), BAR_COLOR);
  });
  doc.line(sx(1), frame.y0, sx(1), frame.y0 + frame.h, REF_COLOR, 1.5, "5,3");
  doc.text(sx(1) + 5, frame.y0 + 12, "uniform", 10, "start", REF_COLOR);
  const skew = fmt(Math.max(...relative) / Math.min(...relative));
  doc.text(frame.x0 + frame.w, frame.y0 + 12, `max/min = ${skew}`, 10, "end");
  return doc.render();
}
