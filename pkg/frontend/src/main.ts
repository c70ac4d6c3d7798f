import { readFileSync } from "fs";

import { MissingColumnError } from "./csv.js";
import { PlotSpec, render } from "./render.js";
import { XAxis, YAxis } from "./series.js";

const USAGE = `usage:
  jolopt-plots --spec SPEC.json
  jolopt-plots [--x iter|time] [--y f|revenue|hv] [--label TPL] [--title T] --out FIG.svg CSV...

The spec file is a JSON PlotSpec: {inputs, x, y, label?, title?, output}.
Inputs may contain '*' wildcards (e.g. grid/*/trajectory.csv).`;

function parseArgs(argv: string[]): PlotSpec {
  let specPath: string | undefined;
  let x: XAxis = "iter";
  let y: YAxis = "f";
  let label: string | undefined;
  let title: string | undefined;
  let output: string | undefined;
  const inputs: string[] = [];

  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    const next = () => {
      i += 1;
      if (i >= argv.length) {
        throw new Error(`${arg} expects a value`);
      }
      return argv[i];
    };
    if (arg === "--spec") {
      specPath = next();
    } else if (arg === "--x") {
      x = next() as XAxis;
    } else if (arg === "--y") {
      y = next() as YAxis;
    } else if (arg === "--label") {
      label = next();
    } else if (arg === "--title") {
      title = next();
    } else if (arg === "--out") {
      output = next();
    } else if (arg === "--help" || arg === "-h") {
      console.log(USAGE);
      process.exit(0);
    } else if (arg.startsWith("--")) {
      throw new Error(`unknown flag ${arg}`);
    } else {
      inputs.push(arg);
    }
  }

  if (specPath !== undefined) {
    return JSON.parse(readFileSync(specPath, "utf-8")) as PlotSpec;
  }
  if (output === undefined || inputs.length === 0) {
    throw new Error("positional mode needs --out and at least one CSV\n" + USAGE);
  }
  return { inputs, x, y, label, title, output };
}

export function main(argv: string[]): number {
  try {
    const spec = parseArgs(argv);
    const count = render(spec);
    console.log(`wrote ${spec.output} (${count} series)`);
    return 0;
  } catch (err) {
    if (err instanceof MissingColumnError) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    console.error(`error: ${err instanceof Error ? err.message : String(err)}`);
    return 1;
  }
}

process.exitCode = main(process.argv.slice(2));
