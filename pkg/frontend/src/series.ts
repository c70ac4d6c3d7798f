import { basename, dirname } from "path";

import { Table, column } from "./csv.js";

export type XAxis = "iter" | "time";
export type YAxis = "f" | "revenue" | "hv";

export interface Series {
  label: string;
  x: number[];
  y: number[];
}

/** Column names per axis choice; trajectory and hv files differ in x. */
function xColumn(table: Table, axis: XAxis): string {
  if (axis === "iter") {
    return "k";
  }
  return table.header.includes("time_s") ? "time_s" : "wall_clock_s";
}

/**
 * Extract one plot series from a CSV table.
 *
 * y = "revenue" negates the stored objective column f (the solver minimizes
 * negated revenue); "hv" reads the hv column of a sweep curve file.
 */
export function toSeries(table: Table, x: XAxis, y: YAxis, labelTemplate: string): Series {
  const xs = column(table, xColumn(table, x));
  const yName = y === "hv" ? "hv" : "f";
  let ys = column(table, yName);
  if (y === "revenue") {
    ys = ys.map((v) => -v);
  }
  return { label: renderLabel(labelTemplate, table.path), x: xs, y: ys };
}

/** {name} expands to the parent directory, {file} to the file stem. */
export function renderLabel(template: string, path: string): string {
  const name = basename(dirname(path));
  const file = basename(path).replace(/\.[^.]*$/, "");
  return template.replaceAll("{name}", name).replaceAll("{file}", file);
}
