/**
 * Traveling-wave phase tracking across a snapshot sequence: the (l, m)
 * stream-function coefficient pair rotates with phase m*c*t, so a linear
 * fit of the unwrapped phase gives the angular drift rate c.
 */

import { writeFileSync } from "node:fs";
import { join } from "node:path";

import { encodePng } from "./png.js";
import { lineChart } from "./diag.js";
import { readSnapshot, sphIndex, streamFromOmega, type Snapshot } from "./snapshot.js";

export interface PhaseFit {
  times: number[];
  phases: number[];
  driftRate: number; // signed c
  predicted: number; // |beta| / (l(l+1) + alpha2) from the snapshot headers
}

export function phaseOfSnapshot(snap: Snapshot, l: number, m: number): number {
  const f = streamFromOmega(snap);
  return Math.atan2(f[sphIndex(l, -m)], f[sphIndex(l, m)]);
}

function unwrap(phases: number[]): number[] {
  const out = [phases[0]];
  for (let i = 1; i < phases.length; i++) {
    let d = phases[i] - phases[i - 1];
    while (d > Math.PI) d -= 2 * Math.PI;
    while (d < -Math.PI) d += 2 * Math.PI;
    out.push(out[i - 1] + d);
  }
  return out;
}

export function fitPhase(paths: string[], l: number, m: number): PhaseFit {
  if (m <= 0) throw new Error("phase fit needs m > 0");
  const snaps = paths.map(readSnapshot);
  snaps.sort((a, b) => a.header.time - b.header.time);
  const times = snaps.map((s) => s.header.time);
  const phases = unwrap(snaps.map((s) => phaseOfSnapshot(s, l, m)));
  // least-squares slope
  const n = times.length;
  const tbar = times.reduce((a, b) => a + b, 0) / n;
  const pbar = phases.reduce((a, b) => a + b, 0) / n;
  let num = 0;
  let den = 0;
  for (let i = 0; i < n; i++) {
    num += (times[i] - tbar) * (phases[i] - pbar);
    den += (times[i] - tbar) ** 2;
  }
  const slope = num / den;
  const h = snaps[0].header;
  const predicted = Math.abs(h.beta) / (l * (l + 1) + h.alpha2);
  return { times, phases, driftRate: slope / m, predicted };
}

export function plotPhase(fit: PhaseFit, outDir: string): string {
  const img = lineChart(fit.times, [fit.phases]);
  const file = "phase_fit.png";
  writeFileSync(join(outDir, file), encodePng(img.data, img.width, img.height));
  return file;
}
