/** Line/scatter figure with optional log axes and power-law fit annotation.
 *  Reads only the CSVs the physics suite emits; never recomputes physics. */

import { readFileSync, writeFileSync } from "node:fs";

import { column, parseCsv } from "./csv.js";
import { loglogFit } from "./fit.js";
import { encodePng } from "./png.js";
import { Color, Raster } from "./raster.js";

export interface FigureSpec {
  csvPath: string;
  x: string;
  y: string;
  loglog?: boolean;
  fit?: boolean;
  out: string;
  width?: number;
  height?: number;
}

const AXES: Color = [40, 40, 40];
const GRIDC: Color = [220, 220, 220];
const DATA: Color = [25, 90, 180];
const FITC: Color = [190, 60, 40];

interface Mapping {
  toPx: (v: number) => number;
  ticks: number[];
  lo: number;
  hi: number;
}

function niceTicks(lo: number, hi: number, log: boolean): number[] {
  if (log) {
    const ticks: number[] = [];
    const d0 = Math.floor(Math.log10(lo));
    const d1 = Math.ceil(Math.log10(hi));
    for (let d = d0; d <= d1; d++) {
      const v = 10 ** d;
      if (v >= lo / 1.0001 && v <= hi * 1.0001) ticks.push(v);
    }
    if (ticks.length >= 2) return ticks;
    // less than a decade: fall back to 1-2-5 within the range
    const out: number[] = [];
    for (let d = d0 - 1; d <= d1; d++) {
      for (const mB of [1, 2, 5]) {
        const v = mB * 10 ** d;
        if (v >= lo / 1.0001 && v <= hi * 1.0001) out.push(v);
      }
    }
    return out;
  }
  const span = hi - lo || 1;
  const step = 10 ** Math.floor(Math.log10(span / 4));
  const mult = span / step > 8 ? 2 : 1;
  const ticks: number[] = [];
  const s = step * mult;
  for (let v = Math.ceil(lo / s) * s; v <= hi + 1e-12 * span; v += s) {
    ticks.push(v);
  }
  return ticks;
}

function mapping(vals: number[], p0: number, p1: number, log: boolean): Mapping {
  let lo = Math.min(...vals);
  let hi = Math.max(...vals);
  if (log) {
    if (lo <= 0) {
      throw new Error("log axis requires positive data");
    }
    const pad = (Math.log(hi) - Math.log(lo)) * 0.08 || 0.5;
    lo = Math.exp(Math.log(lo) - pad);
    hi = Math.exp(Math.log(hi) + pad);
    const toPx = (v: number) =>
      p0 + ((Math.log(v) - Math.log(lo)) / (Math.log(hi) - Math.log(lo))) * (p1 - p0);
    return { toPx, ticks: niceTicks(lo, hi, true), lo, hi };
  }
  const pad = (hi - lo) * 0.08 || 1;
  lo -= pad;
  hi += pad;
  const toPx = (v: number) => p0 + ((v - lo) / (hi - lo)) * (p1 - p0);
  return { toPx, ticks: niceTicks(lo, hi, false), lo, hi };
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 0.01 && a < 10000) {
    return Number(v.toPrecision(4)).toString();
  }
  return v.toExponential(1).replace("e", "e");
}

export interface RenderResult {
  slope?: number;
  points: number;
}

export function render(spec: FigureSpec): RenderResult {
  const table = parseCsv(readFileSync(spec.csvPath, "utf-8"));
  const xs = column(table, spec.x);
  const ys = column(table, spec.y);
  const W = spec.width ?? 640;
  const H = spec.height ?? 440;
  const mL = 70;
  const mR = 20;
  const mT = 28;
  const mB = 46;
  const img = new Raster(W, H);

  const mx = mapping(xs, mL, W - mR, !!spec.loglog);
  const my = mapping(ys, H - mB, mT, !!spec.loglog);

  // grid + ticks
  for (const t of mx.ticks) {
    const px = Math.round(mx.toPx(t));
    img.line(px, mT, px, H - mB, GRIDC);
    img.text(px - 10, H - mB + 8, fmt(t), AXES);
  }
  for (const t of my.ticks) {
    const py = Math.round(my.toPx(t));
    img.line(mL, py, W - mR, py, GRIDC);
    img.text(6, py - 3, fmt(t), AXES);
  }
  // frame
  img.line(mL, mT, mL, H - mB, AXES);
  img.line(mL, H - mB, W - mR, H - mB, AXES);
  img.line(W - mR, mT, W - mR, H - mB, AXES);
  img.line(mL, mT, W - mR, mT, AXES);

  // data, in x order
  const order = xs.map((_, i) => i).sort((a, b) => xs[a] - xs[b]);
  let prev: [number, number] | null = null;
  for (const i of order) {
    const px = mx.toPx(xs[i]);
    const py = my.toPx(ys[i]);
    if (prev) img.line(prev[0], prev[1], px, py, DATA);
    prev = [px, py];
  }
  for (const i of order) {
    img.marker(mx.toPx(xs[i]), my.toPx(ys[i]), DATA);
  }

  const result: RenderResult = { points: xs.length };
  if (spec.fit) {
    if (!spec.loglog) {
      throw new Error("--fit only applies to log-log figures");
    }
    const { slope, intercept } = loglogFit(xs, ys);
    result.slope = slope;
    const xlo = Math.min(...xs);
    const xhi = Math.max(...xs);
    const yAt = (x: number) => Math.exp(intercept + slope * Math.log(x));
    img.line(
      mx.toPx(xlo), my.toPx(yAt(xlo)), mx.toPx(xhi), my.toPx(yAt(xhi)), FITC,
    );
    img.text(mL + 12, mT + 8, `slope = ${slope.toFixed(6)}`, FITC);
  }

  img.text(Math.round((mL + W - mR) / 2) - 3 * spec.x.length, H - 16, spec.x, AXES);
  img.textVertical(8, Math.round((mT + H - mB) / 2) + 3 * spec.y.length, spec.y, AXES);

  writeFileSync(spec.out, encodePng(W, H, img.data));
  return result;
}
