/**
 * Strict reader for the experiment summary CSV.
 *
 * Accepted schemas (exact column order):
 *   learner,t,mean_step,std_step,mean_cum,std_cum,n_seeds
 *   eta,learner,t,mean_step,std_step,mean_cum,std_cum,n_seeds
 *
 * Schema violations throw SchemaError naming the offending column.
 */

export interface SummaryRow {
  eta: number | null;
  learner: string;
  t: number;
  meanStep: number;
  stdStep: number;
  meanCum: number;
  stdCum: number;
  nSeeds: number;
}

export class SchemaError extends Error {}

const BASE_COLUMNS = [
  "learner",
  "t",
  "mean_step",
  "std_step",
  "mean_cum",
  "std_cum",
  "n_seeds",
];

function checkHeader(header: string[]): boolean {
  const withEta = header[0] === "eta";
  const expected = withEta ? ["eta", ...BASE_COLUMNS] : BASE_COLUMNS;
  if (header.length !== expected.length) {
    throw new SchemaError(
      `summary header has ${header.length} columns, expected ${expected.length} ` +
        `(${expected.join(",")})`,
    );
  }
  for (let i = 0; i < expected.length; i++) {
    if (header[i] !== expected[i]) {
      throw new SchemaError(
        `summary schema mismatch at column ${i + 1}: expected '${expected[i]}', ` +
          `found '${header[i]}'`,
      );
    }
  }
  return withEta;
}

function parseNumber(raw: string, column: string, line: number): number {
  const value = Number(raw);
  if (raw.trim() === "" || Number.isNaN(value)) {
    throw new SchemaError(`bad value for column '${column}' on line ${line}: '${raw}'`);
  }
  return value;
}

export function parseSummary(text: string): SummaryRow[] {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new SchemaError("summary CSV is empty");
  }
  const withEta = checkHeader(lines[0].split(","));
  const rows: SummaryRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    const expectedLen = withEta ? 8 : 7;
    if (parts.length !== expectedLen) {
      throw new SchemaError(
        `line ${i + 1} has ${parts.length} fields, expected ${expectedLen}`,
      );
    }
    const offset = withEta ? 1 : 0;
    rows.push({
      eta: withEta ? parseNumber(parts[0], "eta", i + 1) : null,
      learner: parts[offset],
      t: parseNumber(parts[offset + 1], "t", i + 1),
      meanStep: parseNumber(parts[offset + 2], "mean_step", i + 1),
      stdStep: parseNumber(parts[offset + 3], "std_step", i + 1),
      meanCum: parseNumber(parts[offset + 4], "mean_cum", i + 1),
      stdCum: parseNumber(parts[offset + 5], "std_cum", i + 1),
      nSeeds: parseNumber(parts[offset + 6], "n_seeds", i + 1),
    });
  }
  return rows;
}

export interface CurveGroup {
  label: string;
  t: number[];
  mean: number[];
  std: number[];
}

/** Split rows into labeled curves for one metric. */
export function groupCurves(
  rows: SummaryRow[],
  groupBy: "learner" | "eta",
  metric: "step" | "cum",
): CurveGroup[] {
  if (groupBy === "eta" && rows.some((r) => r.eta === null)) {
    throw new SchemaError("--group-by eta needs an eta column in the summary");
  }
  if (groupBy === "learner") {
    const etas = new Set(rows.map((r) => r.eta));
    if (etas.size > 1) {
      throw new SchemaError(
        "summary mixes several eta values; use --group-by eta",
      );
    }
  } else {
    const learners = new Set(rows.map((r) => r.learner));
    if (learners.size > 1) {
      throw new SchemaError(
        "summary mixes several learners; use --group-by learner",
      );
    }
  }
  const keyed = new Map<string, SummaryRow[]>();
  for (const row of rows) {
    const key = groupBy === "learner" ? row.learner : `eta=${row.eta}`;
    const bucket = keyed.get(key);
    if (bucket) {
      bucket.push(row);
    } else {
      keyed.set(key, [row]);
    }
  }
  const groups: CurveGroup[] = [];
  for (const [label, bucket] of keyed) {
    bucket.sort((a, b) => a.t - b.t);
    groups.push({
      label,
      t: bucket.map((r) => r.t),
      mean: bucket.map((r) => (metric === "step" ? r.meanStep : r.meanCum)),
      std: bucket.map((r) => (metric === "step" ? r.stdStep : r.stdCum)),
    });
  }
  return groups;
}
