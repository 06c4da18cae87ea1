/** Minimal RFC-4180-subset CSV reader: header row, comma separator,
 *  '.' decimal, no quoting needed for the numeric tables we consume. */

export class CsvError extends Error {}

export interface Table {
  header: string[];
  rows: number[][];
}

export function parseCsv(text: string): Table {
  const lines = text
    .split(/\r?\n/)
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new CsvError("empty CSV: no header row");
  }
  const header = lines[0].split(",").map((h) => h.trim());
  if (lines.length === 1) {
    throw new CsvError("empty CSV: header but no data rows");
  }
  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== header.length) {
      throw new CsvError(
        `row ${i + 1}: expected ${header.length} fields, got ${parts.length}`,
      );
    }
    const row = parts.map((p) => {
      const v = Number(p);
      if (!Number.isFinite(v)) {
        throw new CsvError(`row ${i + 1}: non-numeric field ${JSON.stringify(p)}`);
      }
      return v;
    });
    rows.push(row);
  }
  return { header, rows };
}

export function column(table: Table, name: string): number[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new CsvError(
      `missing column ${JSON.stringify(name)}; have ${table.header.join(", ")}`,
    );
  }
  return table.rows.map((r) => r[idx]);
}
