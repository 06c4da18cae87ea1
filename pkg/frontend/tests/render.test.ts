import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { pngSize } from "../src/png.js";
import { render } from "../src/plot.js";

const FIX = join(__dirname, "..", "fixtures");
const OUT = mkdtempSync(join(tmpdir(), "dfplot-"));

describe("figure rendering", () => {
  it("renders discrepancy vs R (log-log)", () => {
    const out = join(OUT, "fas.png");
    const res = render({
      csvPath: join(FIX, "fas_convergence.csv"),
      x: "R",
      y: "abs_disc",
      loglog: true,
      out,
    });
    expect(res.points).toBe(3);
    const { width, height } = pngSize(readFileSync(out));
    expect(width).toBe(640);
    expect(height).toBe(440);
  });

  it("renders error vs mu with fitted slope matching report.json", () => {
    const out = join(OUT, "statphase.png");
    const res = render({
      csvPath: join(FIX, "statphase.csv"),
      x: "mu",
      y: "err_norm",
      loglog: true,
      fit: true,
      out,
    });
    const report = JSON.parse(
      readFileSync(join(FIX, "report_statphase.json"), "utf-8"),
    );
    expect(Math.abs((res.slope as number) - report.results.statphase.slope))
      .toBeLessThan(1e-9);
  });

  it("renders error vs lambda with fit", () => {
    const out = join(OUT, "cones.png");
    const res = render({
      csvPath: join(FIX, "cones_scaling.csv"),
      x: "lambda",
      y: "err_norm",
      loglog: true,
      fit: true,
      out,
    });
    const report = JSON.parse(
      readFileSync(join(FIX, "report_cones.json"), "utf-8"),
    );
    expect(Math.abs((res.slope as number) - report.results.cones.err_slope))
      .toBeLessThan(1e-9);
  });

  it("renders the space-like bound profile (linear y allowed)", () => {
    const out = join(OUT, "spacelike.png");
    const res = render({
      csvPath: join(FIX, "fas_convergence.csv"),
      x: "R",
      y: "spacelike_part",
      out,
    });
    expect(res.points).toBe(3);
    expect(pngSize(readFileSync(out)).width).toBe(640);
  });

  it("errors on missing columns", () => {
    expect(() =>
      render({
        csvPath: join(FIX, "statphase.csv"),
        x: "mu",
        y: "nonexistent",
        out: join(OUT, "bad.png"),
      }),
    ).toThrow(/missing column/);
  });

  it("errors on empty CSV", () => {
    const p = join(OUT, "empty.csv");
    writeFileSync(p, "");
    expect(() =>
      render({ csvPath: p, x: "a", y: "b", out: join(OUT, "bad2.png") }),
    ).toThrow(/empty CSV/);
  });

  it("rejects fit on linear axes", () => {
    expect(() =>
      render({
        csvPath: join(FIX, "statphase.csv"),
        x: "mu",
        y: "err_norm",
        fit: true,
        out: join(OUT, "bad3.png"),
      }),
    ).toThrow(/log-log/);
  });
});
