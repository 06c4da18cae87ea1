#!/usr/bin/env node
/** CLI: render --csv PATH --x COL --y COL [--loglog] [--fit] --out PATH */

import { render } from "./plot.js";

function parseArgs(argv: string[]): Record<string, string | boolean> {
  const out: Record<string, string | boolean> = {};
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (!a.startsWith("--")) {
      throw new Error(`unexpected argument ${a}`);
    }
    const key = a.slice(2);
    if (key === "loglog" || key === "fit") {
      out[key] = true;
    } else {
      const v = argv[++i];
      if (v === undefined) throw new Error(`missing value for --${key}`);
      out[key] = v;
    }
  }
  return out;
}

export function main(argv: string[]): number {
  let args: Record<string, string | boolean>;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(String(err));
    return 2;
  }
  for (const req of ["csv", "x", "y", "out"]) {
    if (typeof args[req] !== "string") {
      console.error(`missing required --${req}`);
      console.error(
        "usage: render --csv PATH --x COL --y COL [--loglog] [--fit] --out PATH",
      );
      return 2;
    }
  }
  try {
    const res = render({
      csvPath: args.csv as string,
      x: args.x as string,
      y: args.y as string,
      loglog: !!args.loglog,
      fit: !!args.fit,
      out: args.out as string,
    });
    const extra = res.slope !== undefined ? ` slope=${res.slope}` : "";
    console.log(`wrote ${args.out} (${res.points} points)${extra}`);
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

const isMain = process.argv[1] && import.meta.url.endsWith(
  process.argv[1].split("/").pop() as string,
);
if (isMain) {
  process.exit(main(process.argv.slice(2)));
}
