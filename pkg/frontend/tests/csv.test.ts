import { describe, expect, it } from "vitest";

import { CsvError, column, parseCsv } from "../src/csv.js";

describe("csv parser", () => {
  it("parses header and numeric rows", () => {
    const t = parseCsv("a,b\n1,2.5\n-3e-2,4\n");
    expect(t.header).toEqual(["a", "b"]);
    expect(t.rows).toEqual([
      [1, 2.5],
      [-0.03, 4],
    ]);
  });

  it("rejects empty input", () => {
    expect(() => parseCsv("")).toThrow(CsvError);
  });

  it("rejects header-only input", () => {
    expect(() => parseCsv("a,b\n")).toThrow(/no data rows/);
  });

  it("rejects ragged rows", () => {
    expect(() => parseCsv("a,b\n1\n")).toThrow(/expected 2 fields/);
  });

  it("rejects non-numeric fields", () => {
    expect(() => parseCsv("a,b\n1,zap\n")).toThrow(/non-numeric/);
  });

  it("extracts columns by name and reports missing ones", () => {
    const t = parseCsv("mu,err\n1,2\n3,4\n");
    expect(column(t, "err")).toEqual([2, 4]);
    expect(() => column(t, "nope")).toThrow(/missing column/);
  });
});
