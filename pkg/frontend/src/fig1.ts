/** Four-panel oscillator figure: log-scale f(x_t) per mu, one curve per
 * friction alpha, dashed vertical lines at the overdamped-to-underdamped
 * transition times. Pure string-built SVG; geometry is exposed through
 * data- attributes so structural tests can recompute every position. */

import { parseTrajectoryCsv } from "./csv.js";
import { MarkersDoc } from "./markers.js";
import { STYLE, curveColor } from "./style.js";

export interface PanelCurve {
  alpha: number;
  t: number[];
  f: number[];
}

export interface PanelSpec {
  mu: number;
  curves: PanelCurve[];
  markers: { alpha: number; t: number }[];
}

export class Fig1Error extends Error {}

/** Group the markers document into per-mu panels, loading each CSV through
 * the supplied reader. Missing files are reported all at once. */
export function assemblePanels(
  doc: MarkersDoc,
  readCsv: (name: string) => string | undefined,
): PanelSpec[] {
  const missing: string[] = [];
  const byMu = new Map<number, PanelSpec>();
  for (const p of doc.panels) {
    let panel = byMu.get(p.mu);
    if (!panel) {
      panel = { mu: p.mu, curves: [], markers: [] };
      byMu.set(p.mu, panel);
    }
    const text = readCsv(p.csv);
    if (text === undefined) {
      missing.push(p.csv);
      continue;
    }
    const series = parseTrajectoryCsv(text, p.csv);
    panel.curves.push({ alpha: p.alpha, t: series.t, f: series.f });
    panel.markers.push({ alpha: p.alpha, t: p.t_transition });
  }
  if (missing.length) {
    throw new Fig1Error(`missing trajectory CSVs: ${missing.join(", ")}`);
  }
  const panels = [...byMu.values()].sort((a, b) => a.mu - b.mu);
  for (const panel of panels) {
    panel.curves.sort((a, b) => a.alpha - b.alpha);
    panel.markers.sort((a, b) => a.alpha - b.alpha);
  }
  return panels;
}

function niceTicks(lo: number, hi: number, n: number): number[] {
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / n)));
  const candidates = [step, 2 * step, 5 * step, 10 * step];
  const chosen = candidates.find((s) => span / s <= n + 1) ?? 10 * step;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / chosen) * chosen; v <= hi + 1e-12 * span; v += chosen) {
    ticks.push(v);
  }
  return ticks;
}

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(0).replace("+", "");
  return String(Number(v.toPrecision(6)));
}

function esc(v: number): string {
  return Number.isFinite(v) ? v.toPrecision(8) : "0";
}

export function renderPanel(panel: PanelSpec, index: number): string {
  const S = STYLE;
  const px0 = S.marginLeft;
  const px1 = S.marginLeft + S.panelWidth;
  const py0 = S.marginTop;
  const py1 = S.marginTop + S.panelHeight;

  const tmin = 0;
  const tmax = Math.max(...panel.curves.map((c) => c.t[c.t.length - 1]));
  let fmax = 0;
  let fminPos = Infinity;
  for (const c of panel.curves) {
    for (const v of c.f) {
      if (v > fmax) fmax = v;
      if (v > 0 && v < fminPos) fminPos = v;
    }
  }
  if (fmax <= 0) {
    fmax = 1;
    fminPos = 1e-12;
  }
  // clip the floor to eight decades below the peak: the spikes dive to the
  // sample resolution and would stretch the axis unreadably otherwise
  const fy1 = Math.ceil(Math.log10(fmax));
  const fy0 = Math.max(Math.floor(Math.log10(Math.max(fminPos, fmax * 1e-8))),
                       fy1 - 9);

  const X = (t: number) => px0 + ((t - tmin) / (tmax - tmin)) * (px1 - px0);
  const Y = (f: number) => {
    const lf = Math.log10(Math.max(f, Math.pow(10, fy0)));
    return py1 - ((lf - fy0) / (fy1 - fy0)) * (py1 - py0);
  };

  const parts: string[] = [];
  parts.push(
    `<g class="panel" data-mu="${panel.mu}" data-tmin="${tmin}" ` +
    `data-tmax="${esc(tmax)}" data-px0="${px0}" data-px1="${px1}" ` +
    `data-py0="${py0}" data-py1="${py1}" data-logf0="${fy0}" ` +
    `data-logf1="${fy1}" transform="translate(${index * (S.marginLeft + S.panelWidth + S.marginRight + S.gap)},0)">`,
  );
  // y grid + decade labels
  for (let k = fy0; k <= fy1; k++) {
    const y = Y(Math.pow(10, k));
    parts.push(`<line class="grid" x1="${px0}" x2="${px1}" y1="${esc(y)}" y2="${esc(y)}" stroke="${S.gridColor}" stroke-width="0.5"/>`);
    if ((fy1 - fy0 <= 8) || k % 2 === 0) {
      parts.push(`<text class="ylabel" x="${px0 - 6}" y="${esc(y + 3)}" text-anchor="end" font-size="${S.fontSize}">1e${k}</text>`);
    }
  }
  // x ticks
  for (const tv of niceTicks(tmin, tmax, 4)) {
    const x = X(tv);
    parts.push(`<line class="tick" x1="${esc(x)}" x2="${esc(x)}" y1="${py1}" y2="${py1 + 4}" stroke="${S.frameColor}" stroke-width="0.7"/>`);
    parts.push(`<text class="xlabel" x="${esc(x)}" y="${py1 + 16}" text-anchor="middle" font-size="${S.fontSize}">${fmtTick(tv)}</text>`);
  }
  // transition markers (dashed, one per curve)
  for (const m of panel.markers) {
    const x = X(m.t);
    parts.push(
      `<line class="marker" data-alpha="${m.alpha}" data-t="${m.t}" ` +
      `x1="${esc(x)}" x2="${esc(x)}" y1="${py0}" y2="${py1}" ` +
      `stroke="${curveColor(m.alpha, 0)}" stroke-dasharray="${S.markerDash}" ` +
      `stroke-width="${S.markerWidth}"/>`,
    );
  }
  // curves
  panel.curves.forEach((c, ci) => {
    const pts = c.t.map((tv, i) => `${esc(X(tv))},${esc(Y(c.f[i]))}`);
    parts.push(
      `<path class="curve" data-alpha="${c.alpha}" fill="none" ` +
      `stroke="${curveColor(c.alpha, ci)}" stroke-width="${S.curveWidth}" ` +
      `d="M${pts.join(" L")}"/>`,
    );
  });
  parts.push(`<rect class="frame" x="${px0}" y="${py0}" width="${px1 - px0}" height="${py1 - py0}" fill="none" stroke="${S.frameColor}" stroke-width="1"/>`);
  parts.push(`<text class="title" x="${(px0 + px1) / 2}" y="${py0 - 10}" text-anchor="middle" font-size="${S.titleSize}">mu = ${panel.mu}</text>`);
  parts.push(`<text class="xaxis" x="${(px0 + px1) / 2}" y="${py1 + 32}" text-anchor="middle" font-size="${S.fontSize}">t</text>`);
  parts.push("</g>");
  return parts.join("\n");
}

export function renderFig1(panels: PanelSpec[]): string {
  if (!panels.length) {
    throw new Fig1Error("no panels to render");
  }
  const S = STYLE;
  const panelSpan = S.marginLeft + S.panelWidth + S.marginRight + S.gap;
  const width = panelSpan * panels.length - S.gap;
  const height = S.marginTop + S.panelHeight + S.marginBottom;
  const body = panels.map((p, i) => renderPanel(p, i)).join("\n");
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="${S.fontFamily}">`,
    `<rect width="${width}" height="${height}" fill="${S.background}"/>`,
    body,
    "</svg>",
  ].join("\n");
}
