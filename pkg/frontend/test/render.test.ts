import { existsSync, mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { parseDiagnostics, plotDiagnostics, readDiagnostics, SchemaError } from "../src/diag.js";
import { writeGallery } from "../src/gallery.js";
import { fitPhase } from "../src/phase.js";
import { PNG_SIGNATURE } from "../src/png.js";
import { fieldMap, renderFieldMap } from "../src/render.js";
import { readSnapshot } from "../src/snapshot.js";

import { readdirSync } from "node:fs";

const FX = join(__dirname, "fixtures");

describe("field maps", () => {
  it("y10 map has exactly one sign change down each meridian column", () => {
    const snap = readSnapshot(join(FX, "y10.qgs"));
    const { values, rgb, width, height } = fieldMap(snap, { width: 64 });
    for (const i of [0, 13, 40]) {
      let changes = 0;
      for (let j = 1; j < height; j++) {
        const a = values[(j - 1) * width + i];
        const b = values[j * width + i];
        if (Math.sign(a) !== Math.sign(b)) changes++;
      }
      expect(changes).toBe(1);
      // pixel-level: red channel dominates blue in the north (positive),
      // blue dominates red in the south, with the diverging colormap
      const north = rgb.subarray(3 * (1 * width + i), 3 * (1 * width + i) + 3);
      const south = rgb.subarray(3 * ((height - 2) * width + i), 3 * ((height - 2) * width + i) + 3);
      expect(north[0]).toBeGreaterThan(north[2]);
      expect(south[2]).toBeGreaterThan(south[0]);
    }
  });

  it("zero field renders a constant-color map", () => {
    const snap = readSnapshot(join(FX, "y10.qgs"));
    const zero = { header: snap.header, coeffs: new Float64Array(snap.coeffs.length) };
    const { rgb } = fieldMap(zero, { width: 32 });
    const first = [rgb[0], rgb[1], rgb[2]];
    for (let i = 0; i < rgb.length; i += 3) {
      expect([rgb[i], rgb[i + 1], rgb[i + 2]]).toEqual(first);
    }
  });

  it("writes a valid PNG and a gallery", () => {
    const dir = mkdtempSync(join(tmpdir(), "plotviz-"));
    const snap = readSnapshot(join(FX, "y10.qgs"));
    const out = join(dir, "y10_omega.png");
    renderFieldMap(snap, out, { width: 96 });
    const bytes = readFileSync(out);
    expect(bytes.subarray(0, 8).equals(PNG_SIGNATURE)).toBe(true);
    expect(bytes.length).toBeGreaterThan(100);
    const indexPath = writeGallery(dir);
    expect(existsSync(indexPath)).toBe(true);
    expect(readFileSync(indexPath, "utf-8")).toContain("y10_omega.png");
  });
});

describe("diagnostics plots", () => {
  it("plots the fixture CSV without error", () => {
    const dir = mkdtempSync(join(tmpdir(), "plotviz-diag-"));
    const diag = readDiagnostics(join(FX, "diagnostics.csv"));
    const { files } = plotDiagnostics(diag, dir);
    expect(files).toContain("drift_energy.png");
    expect(files).toContain("pair_separations.png");
    for (const f of files) {
      const bytes = readFileSync(join(dir, f));
      expect(bytes.subarray(0, 8).equals(PNG_SIGNATURE)).toBe(true);
    }
  });

  it("steady diagnostics give flat drift (parses all rows)", () => {
    const diag = readDiagnostics(join(FX, "diagnostics.csv"));
    const eIdx = diag.columns.indexOf("energy");
    const drift = diag.rows.map((r) => Math.abs(r[eIdx] - diag.rows[0][eIdx]) / diag.rows[0][eIdx]);
    expect(Math.max(...drift)).toBeLessThan(1e-6);
  });

  it("names the missing column in schema errors", () => {
    const bad = "time,energy,enstrophy,casimir3,omega_min,omega_max\n0,1,2,3,4,5\n";
    expect(() => parseDiagnostics(bad)).toThrow(SchemaError);
    expect(() => parseDiagnostics(bad)).toThrow(/casimir4/);
  });
});

describe("phase fit", () => {
  it("reproduces the predicted drift rate within 1%", () => {
    const paths = readdirSync(join(FX, "rossby"))
      .filter((f) => f.endsWith(".qgs"))
      .sort()
      .map((f) => join(FX, "rossby", f));
    const fit = fitPhase(paths, 5, 3);
    expect(fit.predicted).toBeCloseTo(1 / 31, 12);
    const rel = Math.abs(Math.abs(fit.driftRate) - fit.predicted) / fit.predicted;
    expect(rel).toBeLessThan(0.01);
  });
});
