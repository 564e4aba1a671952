/**
 * Tiny deterministic SVG scene builder: linear scales, tick generation,
 * and the handful of primitives the figure renderers need.  Numbers are
 * written with fixed precision so identical inputs give identical bytes.
 */

export function fmt(x: number): string {
  const s = x.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

export type Scale = (x: number) => number;

export function linearScale(
  d0: number,
  d1: number,
  r0: number,
  r1: number,
): Scale {
  const span = d1 - d0;
  if (span === 0) {
    const mid = (r0 + r1) / 2;
    return () => mid;
  }
  return (x: number) => r0 + ((x - d0) / span) * (r1 - r0);
}

/** Round-valued ticks covering [min, max], roughly `count` of them. */
export function ticks(min: number, max: number, count: number): number[] {
  if (min === max) return [min];
  const rawStep = (max - min) / Math.max(1, count);
  const power = Math.pow(10, Math.floor(Math.log10(rawStep)));
  let step = power;
  for (const mult of [1, 2, 5, 10]) {
    if (power * mult >= rawStep) {
      step = power * mult;
      break;
    }
  }
  const out: number[] = [];
  for (let t = Math.ceil(min / step) * step; t <= max + step * 1e-9; t += step) {
    out.push(Number(t.toPrecision(12)));
  }
  return out;
}

export class SvgDoc {
  private parts: string[] = [];

  constructor(
    readonly width: number,
    readonly height: number,
  ) {}

  rect(x: number, y: number, w: number, h: number, fill: string, stroke = "none"): void {
    this.parts.push(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}" stroke="${stroke}"/>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1, dash = ""): void {
    const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" stroke="${stroke}" stroke-width="${width}"${dashAttr}/>`,
    );
  }

  polyline(points: Array<[number, number]>, stroke: string, width = 1.5): void {
    const attr = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.parts.push(
      `<polyline points="${attr}" fill="none" stroke="${stroke}" stroke-width="${width}"/>`,
    );
  }

  circle(cx: number, cy: number, r: number, fill: string): void {
    this.parts.push(`<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="${r}" fill="${fill}"/>`);
  }

  text(
    x: number,
    y: number,
    content: string,
    size = 11,
    anchor: "start" | "middle" | "end" = "start",
    fill = "#222",
  ): void {
    const escaped = content
      .replace(/&/g, "&amp;")
      .replace(/</g, "&lt;")
      .replace(/>/g, "&gt;");
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-size="${size}" text-anchor="${anchor}" fill="${fill}" font-family="sans-serif">${escaped}</text>`,
    );
  }

  render(): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">`,
      `<rect x="0" y="0" width="${this.width}" height="${this.height}" fill="white"/>`,
      ...this.parts,
      "</svg>",
    ].join("\n");
  }
}

export interface Frame {
  x0: number;
  y0: number;
  w: number;
  h: number;
}

/** Draw axes with ticks and labels inside a frame; returns the two scales. */
export function axes(
  doc: SvgDoc,
  frame: Frame,
  xDomain: [number, number],
  yDomain: [number, number],
  xLabel: string,
  yLabel: string,
): { sx: Scale; sy: Scale } {
  const sx = linearScale(xDomain[0], xDomain[1], frame.x0, frame.x0 + frame.w);
  const sy = linearScale(yDomain[0], yDomain[1], frame.y0 + frame.h, frame.y0);
  doc.line(frame.x0, frame.y0 + frame.h, frame.x0 + frame.w, frame.y0 + frame.h, "#444");
  doc.line(frame.x0, frame.y0, frame.x0, frame.y0 + frame.h, "#444");
  for (const t of ticks(xDomain[0], xDomain[1], 6)) {
    const px = sx(t);
    doc.line(px, frame.y0 + frame.h, px, frame.y0 + frame.h + 4, "#444");
    doc.text(px, frame.y0 + frame.h + 16, String(t), 10, "middle");
  }
  for (const t of ticks(yDomain[0], yDomain[1], 5)) {
    const py = sy(t);
    doc.line(frame.x0 - 4, py, frame.x0, py, "#444");
    doc.text(frame.x0 - 7, py + 3, String(t), 10, "end");
  }
  doc.text(frame.x0 + frame.w / 2, frame.y0 + frame.h + 32, xLabel, 11, "middle");
  doc.text(frame.x0 - 34, frame.y0 - 8, yLabel, 11, "start");
  return { sx, sy };
}

/** Equal-width histogram bins over [lo, hi]. */
export function histogram(
  values: number[],
  lo: number,
  hi: number,
  bins: number,
): { edges: number[]; counts: number[] } {
  const edges: number[] = [];
  for (let i = 0; i <= bins; i++) edges.push(lo + ((hi - lo) * i) / bins);
  const counts = new Array(bins).fill(0);
  for (const v of values) {
    if (Number.isNaN(v)) continue;
    let idx = Math.floor(((v - lo) / (hi - lo)) * bins);
    if (idx === bins) idx = bins - 1; // hi itself belongs to the last bin
    if (idx >= 0 && idx < bins) counts[idx] += 1;
  }
  return { edges, counts };
}
