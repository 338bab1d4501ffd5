/**
 * Diagnostics CSV parsing and time-series plots.  Conservation columns are
 * drawn as relative drift from t = 0; pair-separation columns share one
 * log-scale chart.  Schema violations fail loudly, naming the column.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { encodePng } from "./png.js";
import { Raster, tickLabel, type Color } from "./raster.js";

export const BASE_COLUMNS = [
  "time",
  "energy",
  "enstrophy",
  "casimir3",
  "casimir4",
  "omega_min",
  "omega_max",
];

export class SchemaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaError";
  }
}

export interface Diagnostics {
  columns: string[];
  rows: number[][];
  pairColumns: string[];
}

export function parseDiagnostics(text: string, source = "<csv>"): Diagnostics {
  const lines = text.trim().split(/\r?\n/);
  if (lines.length < 2) {
    throw new SchemaError(`${source}: need a header row and at least one data row`);
  }
  const columns = lines[0].split(",");
  for (let i = 0; i < BASE_COLUMNS.length; i++) {
    if (columns[i] !== BASE_COLUMNS[i]) {
      throw new SchemaError(
        `${source}: missing or misplaced column '${BASE_COLUMNS[i]}' (found '${columns[i] ?? ""}')`,
      );
    }
  }
  const pairColumns = columns.slice(BASE_COLUMNS.length);
  for (const c of pairColumns) {
    if (!/^pair\d{3}$/.test(c)) {
      throw new SchemaError(`${source}: unexpected trailing column '${c}'`);
    }
  }
  const rows = lines.slice(1).map((line, i) => {
    const parts = line.split(",").map(Number);
    if (parts.length !== columns.length || parts.some(Number.isNaN)) {
      throw new SchemaError(`${source}: row ${i + 2} does not match the schema`);
    }
    return parts;
  });
  return { columns, rows, pairColumns };
}

export function readDiagnostics(path: string): Diagnostics {
  return parseDiagnostics(readFileSync(path, "utf-8"), path);
}

const SERIES_COLOR: Color = [31, 90, 160];
const AXIS_COLOR: Color = [40, 40, 40];
const GRID_COLOR: Color = [210, 210, 210];

export interface ChartOptions {
  width?: number;
  height?: number;
  logY?: boolean;
}

/** One series against time, with axes and numeric tick labels. */
export function lineChart(
  times: number[],
  series: number[][],
  options: ChartOptions = {},
): Raster {
  const width = options.width ?? 640;
  const height = options.height ?? 360;
  const left = 70;
  const right = width - 15;
  const top = 15;
  const bottom = height - 35;
  const img = new Raster(width, height);

  let ymin = Infinity;
  let ymax = -Infinity;
  for (const s of series) {
    for (let v of s) {
      if (options.logY) v = Math.log10(Math.max(v, 1e-300));
      ymin = Math.min(ymin, v);
      ymax = Math.max(ymax, v);
    }
  }
  if (!Number.isFinite(ymin)) {
    ymin = -1;
    ymax = 1;
  }
  if (ymax - ymin < 1e-300) {
    const pad = Math.max(1e-15, Math.abs(ymax) * 1e-3);
    ymin -= pad;
    ymax += pad;
  }
  const t0 = times[0];
  const t1 = times[times.length - 1];
  const tspan = t1 - t0 || 1;

  const xpix = (t: number) => left + ((t - t0) / tspan) * (right - left);
  const ypix = (v: number) => {
    const vv = options.logY ? Math.log10(Math.max(v, 1e-300)) : v;
    return bottom - ((vv - ymin) / (ymax - ymin)) * (bottom - top);
  };

  img.hline(left, right, bottom, AXIS_COLOR);
  img.vline(left, top, bottom, AXIS_COLOR);
  for (let k = 0; k <= 4; k++) {
    const yv = ymin + (k / 4) * (ymax - ymin);
    const y = Math.round(bottom - (k / 4) * (bottom - top));
    if (k > 0) img.hline(left + 1, right, y, GRID_COLOR);
    const label = options.logY ? `e${tickLabel(yv)}` : tickLabel(options.logY ? 10 ** yv : yv);
    img.text(4, y - 3, label, AXIS_COLOR);
  }
  for (let k = 0; k <= 4; k++) {
    const tv = t0 + (k / 4) * tspan;
    const x = Math.round(xpix(tv));
    img.vline(x, bottom, bottom + 3, AXIS_COLOR);
    img.text(x - 10, bottom + 8, tickLabel(tv), AXIS_COLOR);
  }
  img.text(Math.round((left + right) / 2), bottom + 20, "t", AXIS_COLOR);

  series.forEach((s, idx) => {
    const hue = series.length === 1 ? SERIES_COLOR : seriesColor(idx, series.length);
    img.polyline(times.map(xpix), s.map(ypix), hue);
  });
  return img;
}

function seriesColor(i: number, n: number): Color {
  const t = n <= 1 ? 0 : i / (n - 1);
  return [Math.round(40 + 180 * t), 60, Math.round(200 - 160 * t)];
}

export interface DiagnosticsPlots {
  files: string[];
}

/** Write the standard plot set; returns the created file names. */
export function plotDiagnostics(diag: Diagnostics, outDir: string): DiagnosticsPlots {
  const files: string[] = [];
  const col = (name: string) => {
    const idx = diag.columns.indexOf(name);
    if (idx < 0) throw new SchemaError(`missing column '${name}'`);
    return diag.rows.map((r) => r[idx]);
  };
  const times = col("time");

  const drift = (name: string) => {
    const s = col(name);
    const ref = s[0];
    const scale = Math.abs(ref) > 0 ? Math.abs(ref) : 1;
    return s.map((v) => (v - ref) / scale);
  };

  for (const name of ["energy", "enstrophy", "casimir3", "casimir4"]) {
    const img = lineChart(times, [drift(name)]);
    const file = `drift_${name}.png`;
    writeFileSync(join(outDir, file), encodePng(img.data, img.width, img.height));
    files.push(file);
  }
  const rangeImg = lineChart(times, [col("omega_min"), col("omega_max")]);
  writeFileSync(join(outDir, "omega_range.png"), encodePng(rangeImg.data, rangeImg.width, rangeImg.height));
  files.push("omega_range.png");

  if (diag.pairColumns.length > 0) {
    const series = diag.pairColumns.map((c) => col(c));
    const img = lineChart(times, series, { logY: true });
    writeFileSync(join(outDir, "pair_separations.png"), encodePng(img.data, img.width, img.height));
    files.push("pair_separations.png");
  }
  return { files };
}
