/**
 * Field-map rendering: synthesize a snapshot's potential vorticity (and
 * its derived stream function) on an equirectangular raster and color it.
 * The diverging colormap is centered on zero with symmetric limits, so a
 * sign change in the field is a sign change in the image.
 */

import { writeFileSync } from "node:fs";

import { colormap, type ColormapName } from "./colormap.js";
import { encodePng } from "./png.js";
import { type Snapshot, streamFromOmega } from "./snapshot.js";
import { synthesizeRaster } from "./synth.js";

export interface FieldMapOptions {
  width?: number;
  colormap?: ColormapName;
  field?: "omega" | "stream";
}

export interface FieldMapResult {
  values: Float64Array;
  rgb: Uint8Array;
  width: number;
  height: number;
  vmax: number;
}

export function fieldMap(snap: Snapshot, options: FieldMapOptions = {}): FieldMapResult {
  const width = options.width ?? 720;
  const height = Math.round(width / 2);
  const name = options.colormap ?? "rdbu";
  const coeffs = options.field === "stream" ? streamFromOmega(snap) : snap.coeffs;
  const values = synthesizeRaster(coeffs, snap.header.lmax, width, height);
  let vmax = 0;
  for (const v of values) vmax = Math.max(vmax, Math.abs(v));
  const scale = vmax > 0 ? vmax : 1;
  const rgb = new Uint8Array(3 * width * height);
  for (let i = 0; i < values.length; i++) {
    const t = 0.5 + 0.5 * (values[i] / scale);
    rgb.set(colormap(name, t), 3 * i);
  }
  return { values, rgb, width, height, vmax };
}

export function renderFieldMap(snap: Snapshot, outPath: string, options: FieldMapOptions = {}): FieldMapResult {
  const result = fieldMap(snap, options);
  writeFileSync(outPath, encodePng(result.rgb, result.width, result.height));
  return result;
}
