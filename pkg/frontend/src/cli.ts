/** decaylab-figures CLI:
 *
 *   node dist/cli.js fig1 --dir OUTDIR [--markers FILE] [--out fig1.svg]
 *   node dist/cli.js decay --csv a.csv[,b.csv...] [--refs 1/t,1/t2] [--out decay.svg]
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { parseTrajectoryCsv } from "./csv.js";
import { ReferenceSlope, renderDecay } from "./decay.js";
import { Fig1Error, assemblePanels, renderFig1 } from "./fig1.js";
import { parseMarkers } from "./markers.js";

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`bad flag syntax near '${key}'`);
    }
    flags.set(key.slice(2), argv[i + 1]);
  }
  return flags;
}

function cmdFig1(flags: Map<string, string>): void {
  const dir = flags.get("dir") ?? ".";
  const markersPath = flags.get("markers") ?? path.join(dir, "fig1_markers.json");
  const out = flags.get("out") ?? "fig1.svg";
  if (!fs.existsSync(markersPath)) {
    throw new Fig1Error(`markers file not found: ${markersPath}`);
  }
  const doc = parseMarkers(fs.readFileSync(markersPath, "utf8"), markersPath);
  const panels = assemblePanels(doc, (name) => {
    const p = path.join(dir, name);
    return fs.existsSync(p) ? fs.readFileSync(p, "utf8") : undefined;
  });
  fs.writeFileSync(out, renderFig1(panels));
  console.log(`wrote ${out} (${panels.length} panels)`);
}

function cmdDecay(flags: Map<string, string>): void {
  const csvs = (flags.get("csv") ?? "").split(",").filter((s) => s.length);
  if (!csvs.length) {
    throw new Error("decay needs --csv FILE[,FILE...]");
  }
  const out = flags.get("out") ?? "decay.svg";
  const refs = ((flags.get("refs") ?? "1/t,1/t2").split(",").filter((s) => s.length)) as ReferenceSlope[];
  const series = csvs.map((p) => parseTrajectoryCsv(fs.readFileSync(p, "utf8"), path.basename(p)));
  fs.writeFileSync(out, renderDecay(series, refs));
  console.log(`wrote ${out} (${series.length} series)`);
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    const flags = parseFlags(rest);
    if (command === "fig1") {
      cmdFig1(flags);
    } else if (command === "decay") {
      cmdDecay(flags);
    } else {
      console.error("usage: cli.js fig1|decay [--flags]");
      return 2;
    }
    return 0;
  } catch (e) {
    console.error(`error: ${(e as Error).message}`);
    return 1;
  }
}

process.exit(main(process.argv.slice(2)));
