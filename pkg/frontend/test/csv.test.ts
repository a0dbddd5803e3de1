import { describe, expect, it } from "vitest";

import { CsvError, parseTrajectoryCsv } from "../src/csv.js";
import { parseMarkers, MarkersError } from "../src/markers.js";

describe("trajectory csv parser", () => {
  it("parses the documented header layout", () => {
    const s = parseTrajectoryCsv("t,x,v,f,gnorm\n0,1,0,0.5,1\n0.1,0.9,-1,0.405,0.9\n", "a.csv");
    expect(s.t).toEqual([0, 0.1]);
    expect(s.f[1]).toBeCloseTo(0.405);
    expect(s.columns).toContain("gnorm");
  });

  it("reports the offending row number", () => {
    expect(() =>
      parseTrajectoryCsv("t,x,f,gnorm\n0,1,0.5,1\n0.1,0.9\n", "b.csv"),
    ).toThrowError(/b\.csv: row 3/);
  });

  it("reports non-numeric rows", () => {
    expect(() =>
      parseTrajectoryCsv("t,x,f,gnorm\nzero,1,0.5,1\n", "c.csv"),
    ).toThrowError(/c\.csv: row 2/);
  });

  it("requires t and f columns", () => {
    expect(() => parseTrajectoryCsv("a,b\n1,2\n")).toThrow(CsvError);
  });
});

describe("markers parser", () => {
  it("round-trips a minimal document", () => {
    const doc = parseMarkers(JSON.stringify({
      schema_version: 1,
      panels: [{ mu: 1, alpha: 3, t_transition: 1.5, csv: "x.csv" }],
    }));
    expect(doc.panels[0].t_transition).toBe(1.5);
  });

  it("rejects wrong schema versions and missing fields", () => {
    expect(() => parseMarkers('{"schema_version": 2, "panels": []}')).toThrow(MarkersError);
    expect(() =>
      parseMarkers(JSON.stringify({ schema_version: 1, panels: [{ mu: 1 }] })),
    ).toThrowError(/missing 'alpha'/);
  });
});
