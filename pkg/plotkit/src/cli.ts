#!/usr/bin/env node
/**
 * plot-fig1 --feedback <csv> --nofeedback <csv> --out <image>
 *
 * Reads the two ensemble CSV files emitted by the simulator and writes the
 * comparison figure as SVG.  Exit codes: 0 success, 1 runtime failure,
 * 2 usage error.
 */

import { fileURLToPath } from "node:url";

import { loadCsv, SchemaError } from "./csv.js";
import { renderFig1ToFile, RenderError } from "./render.js";

interface Args {
  feedback: string;
  nofeedback: string;
  out: string;
}

function parseArgs(argv: string[]): Args {
  const out: Partial<Args> = {};
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (value === undefined) {
      throw new Error(`flag ${flag} needs a value`);
    }
    switch (flag) {
      case "--feedback":
        out.feedback = value;
        break;
      case "--nofeedback":
        out.nofeedback = value;
        break;
      case "--out":
        out.out = value;
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  if (!out.feedback || !out.nofeedback || !out.out) {
    throw new Error("usage: plot-fig1 --feedback <csv> --nofeedback <csv> --out <image>");
  }
  return out as Args;
}

export function run(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 2;
  }
  try {
    const feedback = loadCsv(args.feedback, "with feedback");
    const nofeedback = loadCsv(args.nofeedback, "without feedback");
    renderFig1ToFile(feedback, nofeedback, args.out);
    console.log(args.out);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError || err instanceof RenderError) {
      console.error(`${err.name}: ${err.message}`);
    } else {
      console.error(String(err));
    }
    return 1;
  }
}

if (process.argv[1] && fileURLToPath(import.meta.url) === process.argv[1]) {
  process.exit(run(process.argv.slice(2)));
}
