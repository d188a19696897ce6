/**
 * Parsers for the simulation outputs: JSON-lines trial records, CSV tables,
 * and the batch summary. Parse failures name the file and line.
 */

import { readFileSync } from "node:fs";

export interface TrialRecord {
  seed: number;
  alpha: number;
  d: number;
  N: number;
  p_w: number;
  p_z1: number;
  p_z2: number;
  two_point_mass: number;
  w: number[];
  z1: number[];
  z2: number[];
  w_over_N: number[];
  w_equals_z1: boolean;
  w_in_top_two: boolean;
  ties_detected: boolean;
}

const REQUIRED_NUMERIC = ["alpha", "d", "N", "p_w", "p_z1", "p_z2", "two_point_mass"] as const;

export function parseRecordsJsonl(path: string): TrialRecord[] {
  const text = readFileSync(path, "utf8");
  const lines = text.split("\n").filter((line) => line.trim().length > 0);
  if (lines.length === 0) {
    throw new Error(`${path}: no records`);
  }
  return lines.map((line, i) => {
    let obj: Record<string, unknown>;
    try {
      obj = JSON.parse(line);
    } catch (err) {
      throw new Error(`${path}:${i + 1}: invalid JSON (${(err as Error).message})`);
    }
    if ("error" in obj) {
      throw new Error(`${path}:${i + 1}: batch contains a failed trial: ${obj["error"]}`);
    }
    for (const key of REQUIRED_NUMERIC) {
      if (typeof obj[key] !== "number" || !Number.isFinite(obj[key] as number)) {
        throw new Error(`${path}:${i + 1}: missing or non-numeric field '${key}'`);
      }
    }
    if (!Array.isArray(obj["w_over_N"])) {
      throw new Error(`${path}:${i + 1}: missing field 'w_over_N'`);
    }
    return obj as unknown as TrialRecord;
  });
}

/** Require one common value of a parameter across records (mixed inputs are rejected). */
export function commonValue(records: TrialRecord[], key: "alpha" | "d" | "N"): number {
  const values = new Set(records.map((r) => r[key]));
  if (values.size !== 1) {
    throw new Error(`records mix several values of ${key}: ${[...values].sort().join(", ")}`);
  }
  return records[0][key];
}

export interface CsvTable {
  header: string[];
  rows: string[][];
}

export function parseCsvTable(path: string): CsvTable {
  const text = readFileSync(path, "utf8");
  const lines = text.split("\n").filter((line) => line.trim().length > 0);
  if (lines.length < 2) {
    throw new Error(`${path}: expected a header and at least one data row`);
  }
  const header = lines[0].split(",").map((h) => h.trim());
  const rows = lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== header.length) {
      throw new Error(`${path}:${i + 2}: expected ${header.length} cells, got ${cells.length}`);
    }
    return cells;
  });
  return { header, rows };
}

export function numericColumn(table: CsvTable, name: string, path: string): number[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new Error(`${path}: missing column '${name}' (have: ${table.header.join(", ")})`);
  }
  return table.rows.map((row, i) => {
    const v = Number(row[idx]);
    if (!Number.isFinite(v) && row[idx].trim() !== "") {
      throw new Error(`${path}:${i + 2}: non-numeric value '${row[idx]}' in column '${name}'`);
    }
    return v;
  });
}

export interface BatchSummary {
  endpoint_ks?: { ks_distance: number; n_used: number; n_excluded: number };
}

export function parseSummary(path: string): BatchSummary {
  try {
    return JSON.parse(readFileSync(path, "utf8"));
  } catch (err) {
    throw new Error(`${path}: invalid summary JSON (${(err as Error).message})`);
  }
}
