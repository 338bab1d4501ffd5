#!/usr/bin/env node
/**
 * Batch plotting CLI over qgsphere output files.
 *
 *   plotviz field  <snapshot...> --out DIR [--width N] [--colormap rdbu|viridis] [--every N]
 *   plotviz diag   <diagnostics.csv> --out DIR
 *   plotviz phase  <snapshot...> --l L --m M --out DIR
 *   plotviz check  <snapshot> <dumpgrid.csv> [--tol 1e-8]
 *   plotviz gallery --out DIR
 *
 * Exit codes: 0 ok, 1 check failure, 2 usage/format error.
 */

import { mkdirSync } from "node:fs";
import { basename, join } from "node:path";

import { checkAgainstDump } from "./check.js";
import { plotDiagnostics, readDiagnostics, SchemaError } from "./diag.js";
import { writeGallery } from "./gallery.js";
import { fitPhase, plotPhase } from "./phase.js";
import { renderFieldMap } from "./render.js";
import { readSnapshot, SnapshotFormatError } from "./snapshot.js";
import type { ColormapName } from "./colormap.js";

interface Parsed {
  positional: string[];
  options: Map<string, string>;
}

function parseArgs(argv: string[]): Parsed {
  const positional: string[] = [];
  const options = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a.startsWith("--")) {
      const key = a.slice(2);
      const val = argv[i + 1];
      if (val === undefined || val.startsWith("--")) {
        options.set(key, "true");
      } else {
        options.set(key, val);
        i++;
      }
    } else {
      positional.push(a);
    }
  }
  return { positional, options };
}

function usage(): number {
  console.error(
    "usage: plotviz <field|diag|phase|check|gallery> [paths...] [--out DIR] [options]",
  );
  return 2;
}

function requireOut(opts: Map<string, string>): string {
  const out = opts.get("out");
  if (!out) {
    throw new UsageError("--out DIR is required");
  }
  mkdirSync(out, { recursive: true });
  return out;
}

class UsageError extends Error {}

function cmdField(paths: string[], opts: Map<string, string>): number {
  if (paths.length === 0) throw new UsageError("field needs at least one snapshot");
  const out = requireOut(opts);
  const width = opts.has("width") ? Number(opts.get("width")) : 720;
  const cmap = (opts.get("colormap") ?? "rdbu") as ColormapName;
  const every = opts.has("every") ? Number(opts.get("every")) : 1;
  let rendered = 0;
  paths
    .filter((_, i) => i % every === 0)
    .forEach((path) => {
      const snap = readSnapshot(path);
      const stem = basename(path).replace(/\.qgs$/, "");
      for (const field of ["omega", "stream"] as const) {
        const file = join(out, `${stem}_${field}.png`);
        const res = renderFieldMap(snap, file, { width, colormap: cmap, field });
        console.log(`${file}: |${field}|max = ${res.vmax.toExponential(3)}`);
      }
      rendered++;
    });
  writeGallery(out);
  console.log(`rendered ${rendered} snapshot(s) into ${out}`);
  return 0;
}

function cmdDiag(paths: string[], opts: Map<string, string>): number {
  if (paths.length !== 1) throw new UsageError("diag needs exactly one CSV path");
  const out = requireOut(opts);
  const diag = readDiagnostics(paths[0]);
  const plots = plotDiagnostics(diag, out);
  writeGallery(out);
  console.log(`wrote ${plots.files.length} plots: ${plots.files.join(", ")}`);
  return 0;
}

function cmdPhase(paths: string[], opts: Map<string, string>): number {
  if (paths.length < 3) throw new UsageError("phase needs at least three snapshots");
  const l = Number(opts.get("l"));
  const m = Number(opts.get("m"));
  if (!Number.isInteger(l) || !Number.isInteger(m) || m <= 0) {
    throw new UsageError("phase needs integer --l and positive --m");
  }
  const out = requireOut(opts);
  const fit = fitPhase(paths, l, m);
  plotPhase(fit, out);
  writeGallery(out);
  const relErr =
    fit.predicted > 0 ? Math.abs(Math.abs(fit.driftRate) - fit.predicted) / fit.predicted : NaN;
  console.log(`fitted drift rate c = ${fit.driftRate.toExponential(6)}`);
  console.log(`predicted |c| = ${fit.predicted.toExponential(6)}`);
  console.log(`relative error = ${relErr.toExponential(3)}`);
  return 0;
}

function cmdCheck(paths: string[], opts: Map<string, string>): number {
  if (paths.length !== 2) throw new UsageError("check needs: <snapshot> <dumpgrid.csv>");
  const tol = opts.has("tol") ? Number(opts.get("tol")) : 1e-8;
  const snap = readSnapshot(paths[0]);
  const res = checkAgainstDump(snap, paths[1]);
  console.log(
    `compared ${res.count} grid values: max |diff| = ${res.maxAbsDiff.toExponential(3)} (tol ${tol})`,
  );
  if (res.maxAbsDiff > tol) {
    console.error("CHECK FAILED");
    return 1;
  }
  console.log("CHECK PASSED");
  return 0;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  if (!command) return usage();
  const { positional, options } = parseArgs(rest);
  try {
    switch (command) {
      case "field":
        return cmdField(positional, options);
      case "diag":
        return cmdDiag(positional, options);
      case "phase":
        return cmdPhase(positional, options);
      case "check":
        return cmdCheck(positional, options);
      case "gallery":
        writeGallery(requireOut(options));
        return 0;
      default:
        return usage();
    }
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`usage error: ${err.message}`);
      return 2;
    }
    if (err instanceof SnapshotFormatError || err instanceof SchemaError) {
      console.error(`format error: ${err.message}`);
      return 2;
    }
    throw err;
  }
}

process.exitCode = main(process.argv.slice(2));
