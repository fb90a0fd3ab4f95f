/**
 * CSV parsing for the experiment output files.
 *
 * Only the documented columns are read; extra columns are ignored and a
 * missing column is a schema error naming it. Values are never
 * recomputed here — the simulation side is the single source of truth.
 */

export class SchemaError extends Error {}
export class EmptyCsvError extends Error {}

export interface RegretRow {
  replicate: number;
  T: number;
  normalized_regret: number;
}

export interface EstimationRow {
  replicate: number;
  gamma_n: number;
  est_error: number;
}

function splitRows(text: string): string[][] {
  return text
    .split(/\r?\n/)
    .map((line) => line.trim())
    .filter((line) => line.length > 0)
    .map((line) => line.split(","));
}

function parseTable(text: string, required: string[], label: string): Record<string, number>[] {
  const rows = splitRows(text);
  if (rows.length === 0) {
    throw new EmptyCsvError(`${label}: empty CSV, nothing to plot`);
  }
  const header = rows[0].map((h) => h.trim());
  const indices: Record<string, number> = {};
  for (const column of required) {
    const idx = header.indexOf(column);
    if (idx < 0) {
      throw new SchemaError(`${label}: missing required column "${column}" (found: ${header.join(", ")})`);
    }
    indices[column] = idx;
  }
  const out: Record<string, number>[] = [];
  for (const row of rows.slice(1)) {
    const record: Record<string, number> = {};
    for (const column of required) {
      const value = Number(row[indices[column]]);
      if (!Number.isFinite(value)) {
        throw new SchemaError(`${label}: non-numeric value "${row[indices[column]]}" in column "${column}"`);
      }
      record[column] = value;
    }
    out.push(record);
  }
  if (out.length === 0) {
    throw new EmptyCsvError(`${label}: CSV has a header but no data rows`);
  }
  return out;
}

export function parseRegretCsv(text: string): RegretRow[] {
  return parseTable(text, ["replicate", "T", "normalized_regret"], "regret.csv") as unknown as RegretRow[];
}

export function parseEstimationCsv(text: string): EstimationRow[] {
  return parseTable(text, ["replicate", "gamma_n", "est_error"], "estimation.csv") as unknown as EstimationRow[];
}
