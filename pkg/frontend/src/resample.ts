// Arc-length resampling of sketched paths. The tracker's nearest-point
// search is sample based, so freehand strokes are rewritten to uniform
// spacing before they go on the wire.

import type { Point } from "./mapping.js";

export const MAX_SPACING_M = 0.05;

function dedupe(points: Point[]): Point[] {
  const out: Point[] = [];
  for (const p of points) {
    const last = out[out.length - 1];
    if (!last || last.x !== p.x || last.y !== p.y) out.push(p);
  }
  return out;
}

/**
 * Resample a polyline to uniform spacing of at most `spacing` meters.
 * Endpoints are preserved exactly. Throws on fewer than two distinct
 * points.
 */
export function resampleUniform(
  points: Point[],
  spacing = MAX_SPACING_M
): Point[] {
  const path = dedupe(points);
  if (path.length < 2) {
    throw new Error("a track needs at least two distinct points");
  }
  const cumulative = [0];
  for (let i = 1; i < path.length; i++) {
    const a = path[i - 1]!;
    const b = path[i]!;
    cumulative.push(cumulative[i - 1]! + Math.hypot(b.x - a.x, b.y - a.y));
  }
  const total = cumulative[cumulative.length - 1]!;
  const samples = Math.max(2, Math.ceil(total / spacing) + 1);
  const out: Point[] = [];
  let seg = 0;
  for (let k = 0; k < samples; k++) {
    const target = (total * k) / (samples - 1);
    while (seg < path.length - 2 && cumulative[seg + 1]! < target) seg++;
    const segLen = cumulative[seg + 1]! - cumulative[seg]!;
    const frac = segLen > 0 ? (target - cumulative[seg]!) / segLen : 0;
    const a = path[seg]!;
    const b = path[seg + 1]!;
    out.push({ x: a.x + (b.x - a.x) * frac, y: a.y + (b.y - a.y) * frac });
  }
  return out;
}

export function flatten(points: Point[]): number[] {
  const flat: number[] = [];
  for (const p of points) flat.push(p.x, p.y);
  return flat;
}

export function spacingOf(points: Point[]): number[] {
  const gaps: number[] = [];
  for (let i = 1; i < points.length; i++) {
    const a = points[i - 1]!;
    const b = points[i]!;
    gaps.push(Math.hypot(b.x - a.x, b.y - a.y));
  }
  return gaps;
}

/** Serialize a flat [x0,y0,...] track to the `X Y` per-line file format. */
export function trackFileText(flat: number[]): string {
  let out = "";
  for (let i = 0; i < flat.length; i += 2) {
    out += `${toPrecision6(flat[i]!)} ${toPrecision6(flat[i + 1]!)}\n`;
  }
  return out;
}

function toPrecision6(v: number): string {
  return Number(v.toPrecision(6)).toString();
}
