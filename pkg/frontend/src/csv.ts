import { readFileSync } from "fs";

export interface Table {
  path: string;
  header: string[];
  rows: number[][];
}

export class MissingColumnError extends Error {
  readonly column: string;
  constructor(column: string, path: string) {
    super(`missing column '${column}' in ${path}`);
    this.column = column;
  }
}

/** Parse a comma-separated file with a mandatory header row. */
export function readCsv(path: string): Table {
  const text = readFileSync(path, "utf-8");
  const lines = text.split("\n").map((l) => l.replace(/\r$/, "")).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new Error(`empty CSV: ${path}`);
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((line) => line.split(",").map(Number));
  return { path, header, rows };
}

/** Values of one named column; throws MissingColumnError when absent. */
export function column(table: Table, name: string): number[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new MissingColumnError(name, table.path);
  }
  return table.rows.map((row) => row[idx]);
}
