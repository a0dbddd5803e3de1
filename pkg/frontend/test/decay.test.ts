import * as fs from "node:fs";
import * as path from "node:path";
import { describe, expect, it } from "vitest";

import { parseTrajectoryCsv } from "../src/csv.js";
import { DecayError, renderDecay } from "../src/decay.js";

const FIXTURES = path.join(__dirname, "fixtures");

describe("decay renderer", () => {
  const series = ["fig1_mu1_alpha3.csv", "fig1_mu1_alpha10.csv"].map((n) =>
    parseTrajectoryCsv(fs.readFileSync(path.join(FIXTURES, n), "utf8"), n),
  );

  it("overlays the series with both reference slopes", () => {
    const svg = renderDecay(series, ["1/t", "1/t2"]);
    expect([...svg.matchAll(/<path class="curve"/g)]).toHaveLength(2);
    expect(svg).toContain('data-slope="1/t"');
    expect(svg).toContain('data-slope="1/t2"');
    expect(svg).toContain('data-label="fig1_mu1_alpha3.csv"');
  });

  it("log-log axes cover the data", () => {
    const svg = renderDecay(series);
    const m = svg.match(/data-lt0="([^"]+)" data-lt1="([^"]+)"/)!;
    expect(Number(m[2])).toBeGreaterThan(Number(m[1]));
  });

  it("rejects empty input", () => {
    expect(() => renderDecay([])).toThrow(DecayError);
  });

  it("rejects all-zero series", () => {
    expect(() =>
      renderDecay([{ name: "z", columns: ["t", "f"], t: [0, 1], x: [0, 0], f: [0, 0] }]),
    ).toThrowError(/no positive/);
  });
});
