/** Figure styling in one place: colors match the caption convention
 * (alpha = 3 drawn green, alpha = 10 drawn red). */

export const STYLE = {
  panelWidth: 270,
  panelHeight: 240,
  marginLeft: 52,
  marginRight: 12,
  marginTop: 30,
  marginBottom: 40,
  gap: 14,
  background: "#ffffff",
  frameColor: "#444444",
  gridColor: "#dddddd",
  fontFamily: "Helvetica, Arial, sans-serif",
  fontSize: 11,
  titleSize: 12,
  curveWidth: 1.3,
  markerDash: "5,4",
  markerWidth: 1.0,
  referenceDash: "2,3",
  referenceColor: "#888888",
  alphaColors: { "3": "#2ca02c", "10": "#d62728" } as Record<string, string>,
  fallbackColors: ["#1f77b4", "#ff7f0e", "#9467bd", "#8c564b"],
};

export function curveColor(alpha: number, index: number): string {
  const key = String(alpha);
  if (STYLE.alphaColors[key] !== undefined) {
    return STYLE.alphaColors[key];
  }
  return STYLE.fallbackColors[index % STYLE.fallbackColors.length];
}
