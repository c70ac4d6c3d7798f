import { readdirSync, statSync, writeFileSync } from "fs";
import { join, sep } from "path";

import { readCsv } from "./csv.js";
import { Series, XAxis, YAxis, toSeries } from "./series.js";
import { renderChart } from "./svg.js";

export interface PlotSpec {
  inputs: string | string[];
  x: XAxis;
  y: YAxis;
  label?: string;
  output: string;
  title?: string;
}

const X_LABELS: Record<XAxis, string> = { iter: "iteration", time: "seconds" };
const Y_LABELS: Record<YAxis, string> = { f: "objective", revenue: "revenue", hv: "hypervolume" };

/** Expand a pattern whose segments may contain '*' (single-level only). */
export function expandGlob(pattern: string): string[] {
  if (!pattern.includes("*")) {
    return [pattern];
  }
  const segments = pattern.split(sep === "\\" ? /[\\/]/ : "/");
  let candidates = [segments[0] === "" ? "/" : segments[0] === "." ? "." : ""];
  let start = 0;
  if (segments[0] === "" || segments[0] === ".") {
    start = 1;
  } else {
    candidates = ["."];
    start = 0;
  }
  let paths = candidates;
  for (let i = start; i < segments.length; i++) {
    const segment = segments[i];
    if (segment === "") {
      continue;
    }
    const next: string[] = [];
    if (segment.includes("*")) {
      const re = new RegExp("^" + segment.split("*").map(escapeRe).join(".*") + "$");
      for (const base of paths) {
        let entries: string[];
        try {
          entries = readdirSync(base === "" ? "." : base);
        } catch {
          continue;
        }
        for (const entry of entries.sort()) {
          if (re.test(entry)) {
            next.push(base === "/" ? "/" + entry : join(base, entry));
          }
        }
      }
    } else {
      for (const base of paths) {
        next.push(base === "/" ? "/" + segment : join(base, segment));
      }
    }
    paths = next;
  }
  return paths.filter((p) => {
    try {
      return statSync(p).isFile();
    } catch {
      return false;
    }
  });
}

function escapeRe(text: string): string {
  return text.replace(/[.*+?^${}()|[\]\\]/g, "\\$&");
}

export function collectInputs(inputs: string | string[]): string[] {
  const patterns = Array.isArray(inputs) ? inputs : [inputs];
  const files = patterns.flatMap(expandGlob);
  if (files.length === 0) {
    throw new Error(`no input files matched: ${patterns.join(", ")}`);
  }
  return files;
}

export function buildSeries(spec: PlotSpec): Series[] {
  const labelTemplate = spec.label ?? "{name}";
  return collectInputs(spec.inputs).map((path) =>
    toSeries(readCsv(path), spec.x, spec.y, labelTemplate));
}

/** Render the spec to its output path; returns the series count. */
export function render(spec: PlotSpec): number {
  if (spec.x !== "iter" && spec.x !== "time") {
    throw new Error(`x must be 'iter' or 'time', got '${spec.x}'`);
  }
  if (spec.y !== "f" && spec.y !== "revenue" && spec.y !== "hv") {
    throw new Error(`y must be 'f', 'revenue', or 'hv', got '${spec.y}'`);
  }
  const series = buildSeries(spec);
  const svg = renderChart(series, {
    title: spec.title,
    xLabel: X_LABELS[spec.x],
    yLabel: Y_LABELS[spec.y],
  });
  writeFileSync(spec.output, svg);
  return series.length;
}
