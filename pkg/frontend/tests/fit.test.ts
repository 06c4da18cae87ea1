import { readFileSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { column, parseCsv } from "../src/csv.js";
import { loglogFit } from "../src/fit.js";

const FIX = join(__dirname, "..", "fixtures");

describe("log-log fit", () => {
  it("recovers an exact power law", () => {
    const x = [1, 2, 4, 8];
    const y = x.map((v) => 3 * v ** -1.5);
    const { slope, intercept } = loglogFit(x, y);
    expect(slope).toBeCloseTo(-1.5, 12);
    expect(Math.exp(intercept)).toBeCloseTo(3, 10);
  });

  it("matches the recorded statphase slope to 1e-9", () => {
    const table = parseCsv(readFileSync(join(FIX, "statphase.csv"), "utf-8"));
    const report = JSON.parse(
      readFileSync(join(FIX, "report_statphase.json"), "utf-8"),
    );
    const { slope } = loglogFit(column(table, "mu"), column(table, "err_norm"));
    expect(Math.abs(slope - report.results.statphase.slope)).toBeLessThan(1e-9);
  });

  it("matches the recorded cones error slope to 1e-9", () => {
    const table = parseCsv(
      readFileSync(join(FIX, "cones_scaling.csv"), "utf-8"),
    );
    const report = JSON.parse(
      readFileSync(join(FIX, "report_cones.json"), "utf-8"),
    );
    const { slope } = loglogFit(
      column(table, "lambda"),
      column(table, "err_norm"),
    );
    expect(Math.abs(slope - report.results.cones.err_slope)).toBeLessThan(1e-9);
  });

  it("needs at least two samples", () => {
    expect(() => loglogFit([1], [1])).toThrow();
  });
});
