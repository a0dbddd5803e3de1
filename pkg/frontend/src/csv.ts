/** Trajectory CSV parsing (header: t,x[,v],f,gnorm — 17-digit floats). */

export interface TrajectorySeries {
  name: string;
  columns: string[];
  t: number[];
  x: number[];
  f: number[];
}

export class CsvError extends Error {}

export function parseTrajectoryCsv(text: string, name = "<csv>"): TrajectorySeries {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length < 2) {
    throw new CsvError(`${name}: no data rows`);
  }
  const columns = lines[0].split(",").map((c) => c.trim());
  for (const required of ["t", "f"]) {
    if (!columns.includes(required)) {
      throw new CsvError(`${name}: missing column '${required}' in header [${columns.join(",")}]`);
    }
  }
  const ti = columns.indexOf("t");
  const xi = columns.indexOf("x");
  const fi = columns.indexOf("f");
  const t: number[] = [];
  const x: number[] = [];
  const f: number[] = [];
  for (let r = 1; r < lines.length; r++) {
    const parts = lines[r].split(",");
    if (parts.length !== columns.length) {
      throw new CsvError(`${name}: row ${r + 1} has ${parts.length} fields, expected ${columns.length}`);
    }
    const tv = Number(parts[ti]);
    const fv = Number(parts[fi]);
    const xv = xi >= 0 ? Number(parts[xi]) : NaN;
    if (!Number.isFinite(tv) || !Number.isFinite(fv)) {
      throw new CsvError(`${name}: row ${r + 1} is not numeric: '${lines[r]}'`);
    }
    t.push(tv);
    x.push(xv);
    f.push(fv);
  }
  return { name, columns, t, x, f };
}
