import { describe, expect, it } from "vitest";

import { histogram, linearScale, SvgDoc, ticks } from "../src/svg.js";

describe("linearScale", () => {
  it("maps the domain endpoints to the range endpoints", () => {
    const s = linearScale(0, 10, 100, 200);
    expect(s(0)).toBe(100);
    expect(s(10)).toBe(200);
    expect(s(5)).toBe(150);
  });

  it("collapses a degenerate domain to the range midpoint", () => {
    const s = linearScale(3, 3, 0, 10);
    expect(s(3)).toBe(5);
  });
});

describe("ticks", () => {
  it("produces round values covering the domain", () => {
    const t = ticks(0, 40, 6);
    expect(t[0]).toBe(0);
    expect(t[t.length - 1]).toBe(40);
    expect(t).toContain(20);
  });
});

describe("histogram", () => {
  it("counts values into equal bins, closing the top edge", () => {
    const { counts } = histogram([0, 0.9, 1, 2, 3, 4], 0, 4, 4);
    expect(counts).toEqual([2, 1, 1, 2]);
  });
});

describe("SvgDoc", () => {
  it("renders a well-formed document", () => {
    const doc = new SvgDoc(100, 50);
    doc.circle(10, 10, 2, "red");
    doc.text(5, 5, "a < b");
    const svg = doc.render();
    expect(svg.startsWith("<svg")).toBe(true);
    expect(svg.endsWith("</svg>")).toBe(true);
    expect(svg).toContain("a &lt; b");
  });
});
