import { describe, expect, it } from "vitest";

import { MAX_SPACING_M, flatten, resampleUniform, spacingOf, trackFileText } from "../src/resample.js";

function arcLength(points: { x: number; y: number }[]): number {
  let total = 0;
  for (let i = 1; i < points.length; i++) {
    total += Math.hypot(points[i]!.x - points[i - 1]!.x, points[i]!.y - points[i - 1]!.y);
  }
  return total;
}

describe("track resampling", () => {
  it("turns a two-point sketch into a uniform straight line", () => {
    const out = resampleUniform([
      { x: 0, y: 0 },
      { x: 0.4, y: 0 },
    ]);
    expect(out.length).toBe(9); // 0.4 m at 0.05 m spacing
    expect(out[0]).toEqual({ x: 0, y: 0 });
    expect(out[out.length - 1]!.x).toBeCloseTo(0.4, 12);
    for (const gap of spacingOf(out)) {
      expect(gap).toBeLessThanOrEqual(MAX_SPACING_M + 1e-12);
      expect(gap).toBeCloseTo(0.05, 12);
    }
  });

  it("resamples a dense scribble to uniform spacing", () => {
    // spiral-ish scribble with wildly uneven native spacing
    const scribble = [];
    for (let i = 0; i <= 200; i++) {
      const t = i / 200;
      scribble.push({
        x: t * 1.5 + 0.02 * Math.sin(40 * t),
        y: 0.4 * Math.sin(6 * t) + 0.01 * Math.cos(90 * t),
      });
    }
    const out = resampleUniform(scribble);
    const gaps = spacingOf(out);
    for (const gap of gaps) expect(gap).toBeLessThanOrEqual(MAX_SPACING_M + 1e-12);
    // uniform in arc length along the source path: chords may come up a
    // little short where the path bends inside one sample, never long
    const arcSpacing = arcLength(scribble) / (out.length - 1);
    expect(arcSpacing).toBeLessThanOrEqual(MAX_SPACING_M + 1e-12);
    for (const gap of gaps) {
      expect(gap).toBeLessThanOrEqual(arcSpacing + 1e-9);
      expect(gap).toBeGreaterThan(arcSpacing * 0.5);
    }
    // endpoints preserved
    expect(out[0]).toEqual(scribble[0]);
    expect(out[out.length - 1]!.x).toBeCloseTo(scribble[200]!.x, 9);
  });

  it("keeps total arc length for straight segments", () => {
    const out = resampleUniform([
      { x: 0, y: 0 },
      { x: 1, y: 0 },
      { x: 1, y: 0.5 },
    ]);
    expect(arcLength(out)).toBeCloseTo(1.5, 9);
  });

  it("rejects empty and single-point sketches", () => {
    expect(() => resampleUniform([])).toThrow();
    expect(() => resampleUniform([{ x: 1, y: 1 }])).toThrow();
    expect(() =>
      resampleUniform([
        { x: 1, y: 1 },
        { x: 1, y: 1 },
      ])
    ).toThrow();
  });

  it("drops consecutive duplicates before resampling", () => {
    const out = resampleUniform([
      { x: 0, y: 0 },
      { x: 0, y: 0 },
      { x: 0.1, y: 0 },
      { x: 0.1, y: 0 },
      { x: 0.2, y: 0 },
    ]);
    const gaps = spacingOf(out);
    for (const gap of gaps) expect(gap).toBeGreaterThan(0);
  });

  it("flattens to the wire layout", () => {
    expect(
      flatten([
        { x: 1, y: 2 },
        { x: 3, y: 4 },
      ])
    ).toEqual([1, 2, 3, 4]);
  });

  it("serializes tracks to the X-Y-per-line file format", () => {
    expect(trackFileText([0, 0, 1.3333333333, -0.5])).toBe("0 0\n1.33333 -0.5\n");
  });
});
