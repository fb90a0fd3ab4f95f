#!/usr/bin/env node
/**
 * Figure generation from experiment CSV logs.
 *
 * Usage:
 *   ctlqr-plots --regret out/regret.csv --out figures/
 *   ctlqr-plots --estimation out/estimation.csv --out est.svg
 *   ctlqr-plots --regret r.csv --estimation e.csv --out figures/
 *
 * With both inputs, --out must be a directory (regret.svg and
 * estimation.svg are written into it); with one input, --out may be an
 * .svg file path or a directory.
 */

import { mkdirSync, readFileSync, writeFileSync } from "fs";
import path from "path";

import { plotEstimationError, plotNormalizedRegret } from "./plots.js";

interface Args {
  regret?: string;
  estimation?: string;
  out: string;
}

function parseArgs(argv: string[]): Args {
  const args: Args = { out: "." };
  for (let i = 0; i < argv.length; i++) {
    switch (argv[i]) {
      case "--regret":
        args.regret = argv[++i];
        break;
      case "--estimation":
        args.estimation = argv[++i];
        break;
      case "--out":
        args.out = argv[++i];
        break;
      case "--help":
      case "-h":
        console.log(
          "usage: ctlqr-plots [--regret regret.csv] [--estimation estimation.csv] --out PATH"
        );
        process.exit(0);
        break;
      default:
        throw new Error(`unknown argument: ${argv[i]}`);
    }
  }
  if (!args.regret && !args.estimation) {
    throw new Error("nothing to do: pass --regret and/or --estimation");
  }
  return args;
}

function outputPath(out: string, defaultName: string, single: boolean): string {
  if (single && out.endsWith(".svg")) {
    mkdirSync(path.dirname(path.resolve(out)), { recursive: true });
    return out;
  }
  mkdirSync(out, { recursive: true });
  return path.join(out, defaultName);
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
  const single = !(args.regret && args.estimation);
  try {
    if (args.regret) {
      const svg = plotNormalizedRegret(readFileSync(args.regret, "utf-8"));
      const file = outputPath(args.out, "regret.svg", single);
      writeFileSync(file, svg);
      console.log(`wrote ${file}`);
    }
    if (args.estimation) {
      const { svg, slope } = plotEstimationError(readFileSync(args.estimation, "utf-8"));
      const file = outputPath(args.out, "estimation.svg", single);
      writeFileSync(file, svg);
      console.log(`wrote ${file} (fitted slope ${slope.toFixed(3)})`);
    }
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
  return 0;
}

if (process.argv[1] && path.basename(process.argv[1]).startsWith("cli")) {
  process.exit(main(process.argv.slice(2)));
}
