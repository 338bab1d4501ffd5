/**
 * Cross-implementation check: synthesize a snapshot at the (mu, lambda)
 * points exported by the primary's `spectrum --dump-grid` CSV and compare
 * values.  This exercises both the binary format and the basis convention
 * end to end across languages.
 */

import { readFileSync } from "node:fs";

import { type Snapshot } from "./snapshot.js";
import { synthesizeAt } from "./synth.js";

export interface GridCheckResult {
  count: number;
  maxAbsDiff: number;
}

export function checkAgainstDump(snap: Snapshot, dumpCsvPath: string): GridCheckResult {
  const lines = readFileSync(dumpCsvPath, "utf-8").trim().split(/\r?\n/);
  const header = lines[0].split(",");
  const want = ["lat_index", "lon_index", "mu", "lambda", "omega"];
  for (const col of want) {
    if (!header.includes(col)) {
      throw new Error(`dump-grid CSV is missing column '${col}'`);
    }
  }
  const muIdx = header.indexOf("mu");
  const lamIdx = header.indexOf("lambda");
  const valIdx = header.indexOf("omega");
  let worst = 0;
  let count = 0;
  for (const line of lines.slice(1)) {
    const parts = line.split(",").map(Number);
    const got = synthesizeAt(snap.coeffs, snap.header.lmax, parts[muIdx], parts[lamIdx]);
    worst = Math.max(worst, Math.abs(got - parts[valIdx]));
    count++;
  }
  return { count, maxAbsDiff: worst };
}
