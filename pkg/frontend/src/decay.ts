/** Log-log overlay of excess-energy trajectories with reference slopes. */

import { TrajectorySeries } from "./csv.js";
import { STYLE } from "./style.js";

export type ReferenceSlope = "1/t" | "1/t2";

export class DecayError extends Error {}

function esc(v: number): string {
  return Number.isFinite(v) ? v.toPrecision(8) : "0";
}

export function renderDecay(
  series: TrajectorySeries[],
  refs: ReferenceSlope[] = ["1/t", "1/t2"],
): string {
  if (!series.length) {
    throw new DecayError("no series to render");
  }
  const S = STYLE;
  const px0 = S.marginLeft;
  const px1 = S.marginLeft + 2 * S.panelWidth;
  const py0 = S.marginTop;
  const py1 = S.marginTop + S.panelHeight;

  let tlo = Infinity;
  let thi = 0;
  let fhi = 0;
  let flo = Infinity;
  for (const s of series) {
    for (let i = 0; i < s.t.length; i++) {
      if (s.t[i] > 0 && s.f[i] > 0) {
        tlo = Math.min(tlo, s.t[i]);
        thi = Math.max(thi, s.t[i]);
        flo = Math.min(flo, s.f[i]);
        fhi = Math.max(fhi, s.f[i]);
      }
    }
  }
  if (!(thi > tlo) || !(fhi > 0)) {
    throw new DecayError("series carry no positive (t, f) samples");
  }
  flo = Math.max(flo, fhi * 1e-14);
  const lt0 = Math.log10(tlo);
  const lt1 = Math.log10(thi);
  const lf0 = Math.floor(Math.log10(flo));
  const lf1 = Math.ceil(Math.log10(fhi));
  const X = (t: number) => px0 + ((Math.log10(t) - lt0) / (lt1 - lt0)) * (px1 - px0);
  const Y = (f: number) => py1 - ((Math.log10(Math.max(f, flo)) - lf0) / (lf1 - lf0)) * (py1 - py0);

  const parts: string[] = [];
  const width = px1 + S.marginRight;
  const height = py1 + S.marginBottom;
  parts.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="${S.fontFamily}">`);
  parts.push(`<rect width="${width}" height="${height}" fill="${S.background}"/>`);
  parts.push(`<g class="panel" data-lt0="${esc(lt0)}" data-lt1="${esc(lt1)}" data-logf0="${lf0}" data-logf1="${lf1}" data-px0="${px0}" data-px1="${px1}" data-py0="${py0}" data-py1="${py1}">`);
  for (let k = lf0; k <= lf1; k++) {
    const y = Y(Math.pow(10, k));
    parts.push(`<line class="grid" x1="${px0}" x2="${px1}" y1="${esc(y)}" y2="${esc(y)}" stroke="${S.gridColor}" stroke-width="0.5"/>`);
    parts.push(`<text class="ylabel" x="${px0 - 6}" y="${esc(y + 3)}" text-anchor="end" font-size="${S.fontSize}">1e${k}</text>`);
  }
  for (let k = Math.ceil(lt0); k <= Math.floor(lt1); k++) {
    const x = X(Math.pow(10, k));
    parts.push(`<line class="tick" x1="${esc(x)}" x2="${esc(x)}" y1="${py1}" y2="${py1 + 4}" stroke="${S.frameColor}" stroke-width="0.7"/>`);
    parts.push(`<text class="xlabel" x="${esc(x)}" y="${py1 + 16}" text-anchor="middle" font-size="${S.fontSize}">1e${k}</text>`);
  }
  // reference slopes anchored to pass through the figure's upper-right region
  for (const ref of refs) {
    const p = ref === "1/t" ? 1 : 2;
    const c = fhi * Math.pow(tlo, p);
    const pts: string[] = [];
    for (let i = 0; i <= 32; i++) {
      const t = Math.pow(10, lt0 + ((lt1 - lt0) * i) / 32);
      pts.push(`${esc(X(t))},${esc(Y(c / Math.pow(t, p)))}`);
    }
    parts.push(`<path class="reference" data-slope="${ref}" fill="none" stroke="${S.referenceColor}" stroke-dasharray="${S.referenceDash}" stroke-width="1" d="M${pts.join(" L")}"/>`);
    parts.push(`<text class="reflabel" x="${px1 - 6}" y="${esc(Y(c / Math.pow(thi, p)) - 4)}" text-anchor="end" font-size="${S.fontSize}" fill="${S.referenceColor}">${ref}</text>`);
  }
  series.forEach((s, si) => {
    const pts: string[] = [];
    for (let i = 0; i < s.t.length; i++) {
      if (s.t[i] > 0) pts.push(`${esc(X(s.t[i]))},${esc(Y(s.f[i]))}`);
    }
    const color = STYLE.fallbackColors[si % STYLE.fallbackColors.length];
    parts.push(`<path class="curve" data-label="${s.name}" fill="none" stroke="${color}" stroke-width="${S.curveWidth}" d="M${pts.join(" L")}"/>`);
  });
  parts.push(`<rect class="frame" x="${px0}" y="${py0}" width="${px1 - px0}" height="${py1 - py0}" fill="none" stroke="${S.frameColor}" stroke-width="1"/>`);
  parts.push("</g>");
  parts.push("</svg>");
  return parts.join("\n");
}
