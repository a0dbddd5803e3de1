/** Structural golden checks on the rendered SVG: panel count, curves per
 * panel, and marker positions recomputed from the embedded scale data. The
 * fixtures are real (decimated) `decaylab reproduce-fig1` outputs. */

import * as fs from "node:fs";
import * as path from "node:path";
import { describe, expect, it } from "vitest";

import { assemblePanels, renderFig1, Fig1Error } from "../src/fig1.js";
import { parseMarkers } from "../src/markers.js";

const FIXTURES = path.join(__dirname, "fixtures");

function loadPanels() {
  const doc = parseMarkers(
    fs.readFileSync(path.join(FIXTURES, "fig1_markers.json"), "utf8"),
  );
  const panels = assemblePanels(doc, (name) => {
    const p = path.join(FIXTURES, name);
    return fs.existsSync(p) ? fs.readFileSync(p, "utf8") : undefined;
  });
  return { doc, panels };
}

function attrs(tag: string): Record<string, string> {
  const out: Record<string, string> = {};
  for (const m of tag.matchAll(/([\w-]+)="([^"]*)"/g)) {
    out[m[1]] = m[2];
  }
  return out;
}

function panelBlocks(svg: string): string[] {
  return svg.split(`<g class="panel"`).slice(1);
}

describe("fig1 renderer", () => {
  const { doc, panels } = loadPanels();
  const svg = renderFig1(panels);

  it("renders four panels in mu order", () => {
    const blocks = panelBlocks(svg);
    expect(blocks).toHaveLength(4);
    const mus = blocks.map((b) => Number(attrs(`<g ${b.split(">")[0]}>`)["data-mu"]));
    expect(mus).toEqual([0.001, 0.1, 1, 10]);
  });

  it("draws two curves per panel, green alpha=3 and red alpha=10", () => {
    for (const block of panelBlocks(svg)) {
      const curves = [...block.matchAll(/<path class="curve"[^>]*>/g)];
      expect(curves).toHaveLength(2);
      const byAlpha = new Map(
        curves.map((c) => [attrs(c[0])["data-alpha"], attrs(c[0])["stroke"]]),
      );
      expect(byAlpha.get("3")).toBe("#2ca02c");
      expect(byAlpha.get("10")).toBe("#d62728");
    }
  });

  it("places dashed markers exactly at the transition times", () => {
    const blocks = panelBlocks(svg);
    for (const block of blocks) {
      const head = attrs(`<g ${block.split(">")[0]}>`);
      const mu = Number(head["data-mu"]);
      const tmin = Number(head["data-tmin"]);
      const tmax = Number(head["data-tmax"]);
      const px0 = Number(head["data-px0"]);
      const px1 = Number(head["data-px1"]);
      const markers = [...block.matchAll(/<line class="marker"[^>]*>/g)];
      expect(markers).toHaveLength(2);
      for (const m of markers) {
        const a = attrs(m[0]);
        const alpha = Number(a["data-alpha"]);
        const t = Number(a["data-t"]);
        // the marker time is alpha / (2 sqrt(mu)) from the markers file
        const expected = doc.panels.find(
          (p) => p.mu === mu && p.alpha === alpha,
        )!.t_transition;
        expect(t).toBeCloseTo(expected, 10);
        expect(t).toBeCloseTo(alpha / (2 * Math.sqrt(mu)), 8);
        // and its pixel position matches the panel's linear time scale
        const xExpected = px0 + ((t - tmin) / (tmax - tmin)) * (px1 - px0);
        expect(Number(a["x1"])).toBeCloseTo(xExpected, 3);
        expect(a["x1"]).toBe(a["x2"]);
        expect(a["stroke-dasharray"]).toBeTruthy();
      }
    }
  });

  it("uses a log f axis covering the data", () => {
    for (const block of panelBlocks(svg)) {
      const head = attrs(`<g ${block.split(">")[0]}>`);
      expect(Number(head["data-logf1"])).toBeGreaterThan(
        Number(head["data-logf0"]),
      );
      expect(block).toContain('class="ylabel"');
    }
  });

  it("renders a single-panel subset", () => {
    const one = renderFig1([panels[2]]);
    expect(panelBlocks(one)).toHaveLength(1);
    expect(one).toContain('data-mu="1"');
  });

  it("reports every missing csv by name", () => {
    const doc2 = parseMarkers(
      fs.readFileSync(path.join(FIXTURES, "fig1_markers.json"), "utf8"),
    );
    expect(() => assemblePanels(doc2, () => undefined)).toThrowError(
      /fig1_mu0\.001_alpha3\.csv.*fig1_mu10_alpha10\.csv/s,
    );
  });

  it("rejects an empty panel list", () => {
    expect(() => renderFig1([])).toThrow(Fig1Error);
  });
});
