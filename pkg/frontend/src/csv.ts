/**
 * CSV loading with schema checks.
 *
 * Renderers consume only the columns documented in FORMATS.md; unknown
 * columns are ignored, while a missing required column is always fatal and
 * the diagnostic names it.
 */

import { readFileSync } from "fs";
import Papa from "papaparse";

export class MissingColumnError extends Error {
  readonly column: string;
  readonly file: string;

  constructor(file: string, column: string, found: string[]) {
    super(
      `${file} is missing required column '${column}' (found: ${found.join(", ")})`,
    );
    this.name = "MissingColumnError";
    this.column = column;
    this.file = file;
  }
}

export interface Table {
  readonly file: string;
  readonly columns: string[];
  readonly rows: Record<string, string>[];
}

export function readCsv(file: string): Table {
  const text = readFileSync(file, "utf-8");
  const parsed = Papa.parse<Record<string, string>>(text, {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new Error(`${file}: CSV parse error at row ${first.row}: ${first.message}`);
  }
  const columns = parsed.meta.fields ?? [];
  return { file, columns, rows: parsed.data };
}

export function requireColumns(table: Table, required: string[]): void {
  for (const column of required) {
    if (!table.columns.includes(column)) {
      throw new MissingColumnError(table.file, column, table.columns);
    }
  }
}

/** Numeric view of one column; blank cells become NaN. */
export function numericColumn(table: Table, column: string): number[] {
  requireColumns(table, [column]);
  return table.rows.map((row) => {
    const raw = row[column];
    return raw === "" || raw === undefined ? NaN : Number(raw);
  });
}
