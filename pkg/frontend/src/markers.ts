/** The fig1_markers.json document written by `decaylab reproduce-fig1`. */

export interface PanelMarker {
  mu: number;
  alpha: number;
  t_transition: number;
  csv: string;
}

export interface MarkersDoc {
  schema_version: number;
  panels: PanelMarker[];
}

export class MarkersError extends Error {}

export function parseMarkers(text: string, name = "<markers>"): MarkersDoc {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch (e) {
    throw new MarkersError(`${name}: not valid JSON: ${(e as Error).message}`);
  }
  const obj = doc as Record<string, unknown>;
  if (obj.schema_version !== 1) {
    throw new MarkersError(`${name}: schema_version must be 1, got ${obj.schema_version}`);
  }
  if (!Array.isArray(obj.panels)) {
    throw new MarkersError(`${name}: field 'panels' must be an array`);
  }
  const panels = obj.panels.map((p, i) => {
    const rec = p as Record<string, unknown>;
    for (const field of ["mu", "alpha", "t_transition", "csv"]) {
      if (rec[field] === undefined) {
        throw new MarkersError(`${name}: panels[${i}] is missing '${field}'`);
      }
    }
    return {
      mu: Number(rec.mu),
      alpha: Number(rec.alpha),
      t_transition: Number(rec.t_transition),
      csv: String(rec.csv),
    };
  });
  return { schema_version: 1, panels };
}
