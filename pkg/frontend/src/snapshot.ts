/**
 * Reader for qgsphere snapshot files: one line of UTF-8 JSON, a newline,
 * then count little-endian float64 coefficients in the real-sh-l-major
 * layout (index(l, m) = l*l + l + m).  Format errors report byte offsets.
 */

import { readFileSync } from "node:fs";

export const SNAPSHOT_FORMAT_VERSION = 1;

export interface SnapshotHeader {
  format_version: number;
  lmax: number;
  alpha2: number;
  beta: number;
  central_a: number;
  time: number;
  field: string;
  layout: string;
  count: number;
}

export interface Snapshot {
  header: SnapshotHeader;
  coeffs: Float64Array;
}

export class SnapshotFormatError extends Error {
  constructor(message: string, public byteOffset: number) {
    super(`${message} (byte offset ${byteOffset})`);
    this.name = "SnapshotFormatError";
  }
}

export function sphIndex(l: number, m: number): number {
  return l * l + l + m;
}

export function parseSnapshot(buf: Buffer, source = "<buffer>"): Snapshot {
  const nl = buf.indexOf(0x0a);
  if (nl < 0) {
    throw new SnapshotFormatError(`${source}: no header line terminator`, 0);
  }
  let header: SnapshotHeader;
  try {
    header = JSON.parse(buf.subarray(0, nl).toString("utf-8"));
  } catch (err) {
    throw new SnapshotFormatError(`${source}: malformed JSON header: ${err}`, 0);
  }
  if (header.format_version !== SNAPSHOT_FORMAT_VERSION) {
    throw new SnapshotFormatError(
      `${source}: unsupported format_version ${header.format_version} (expected ${SNAPSHOT_FORMAT_VERSION})`,
      0,
    );
  }
  if (header.layout !== "real-sh-l-major") {
    throw new SnapshotFormatError(`${source}: unknown layout ${header.layout}`, 0);
  }
  const want = (header.lmax + 1) * (header.lmax + 1);
  if (header.count !== want) {
    throw new SnapshotFormatError(
      `${source}: count ${header.count} does not match lmax ${header.lmax}`,
      0,
    );
  }
  const payload = buf.subarray(nl + 1);
  if (payload.length !== 8 * header.count) {
    throw new SnapshotFormatError(
      `${source}: payload has ${payload.length} bytes, expected ${8 * header.count}`,
      nl + 1 + Math.min(payload.length, 8 * header.count),
    );
  }
  const coeffs = new Float64Array(header.count);
  for (let i = 0; i < header.count; i++) {
    coeffs[i] = payload.readDoubleLE(8 * i);
  }
  return { header, coeffs };
}

export function readSnapshot(path: string): Snapshot {
  return parseSnapshot(readFileSync(path), path);
}

/** Stream function from potential vorticity: divide (omega + beta*cos) by
 *  -(l(l+1) + alpha2) coefficientwise, zero-mean gauge. */
export function streamFromOmega(snap: Snapshot): Float64Array {
  const { lmax, alpha2, beta } = snap.header;
  const out = new Float64Array(snap.coeffs.length);
  const q = Float64Array.from(snap.coeffs);
  q[sphIndex(1, 0)] += beta * Math.sqrt((4 * Math.PI) / 3);
  for (let l = 0; l <= lmax; l++) {
    for (let m = -l; m <= l; m++) {
      const idx = sphIndex(l, m);
      if (l === 0) {
        out[idx] = 0;
      } else {
        out[idx] = q[idx] / -(l * (l + 1) + alpha2);
      }
    }
  }
  return out;
}
