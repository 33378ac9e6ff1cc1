/**
 * Render a two-panel regret figure from an experiment summary CSV.
 *
 * Usage:
 *   node dist/main.js --input summary_online.csv --group-by learner --output fig.png
 */

import { readFileSync, writeFileSync } from "node:fs";
import { SchemaError, parseSummary } from "./csv.js";
import { renderFigure } from "./plot.js";

interface Args {
  input: string;
  groupBy: "learner" | "eta";
  output: string;
}

export function parseArgs(argv: string[]): Args {
  let input: string | undefined;
  let output: string | undefined;
  let groupBy = "learner";
  for (let i = 0; i < argv.length; i++) {
    switch (argv[i]) {
      case "--input":
        input = argv[++i];
        break;
      case "--output":
        output = argv[++i];
        break;
      case "--group-by":
        groupBy = argv[++i];
        break;
      default:
        throw new Error(`unknown argument: ${argv[i]}`);
    }
  }
  if (!input || !output) {
    throw new Error("usage: --input <summary.csv> --group-by <learner|eta> --output <fig.png>");
  }
  if (groupBy !== "learner" && groupBy !== "eta") {
    throw new Error(`--group-by must be learner or eta, got '${groupBy}'`);
  }
  return { input, groupBy, output };
}

export function run(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error((err as Error).message);
    return 2;
  }
  try {
    const rows = parseSummary(readFileSync(args.input, "utf8"));
    const png = renderFigure(rows, { groupBy: args.groupBy });
    writeFileSync(args.output, png);
    console.error(`wrote ${args.output} (${png.length} bytes)`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
    } else {
      console.error(`error: ${(err as Error).message}`);
    }
    return 1;
  }
}

if (process.argv[1] && process.argv[1].endsWith("main.js")) {
  process.exit(run(process.argv.slice(2)));
}
