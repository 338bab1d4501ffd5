import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { checkAgainstDump } from "../src/check.js";
import { readSnapshot, sphIndex } from "../src/snapshot.js";
import { legendreColumns, synthesizeAt, synthesizeRaster } from "../src/synth.js";

const FX = join(__dirname, "fixtures");

describe("independent synthesis", () => {
  it("matches the primary dump-grid values to 1e-8", () => {
    const snap = readSnapshot(join(FX, "random12.qgs"));
    const res = checkAgainstDump(snap, join(FX, "random12_grid.csv"));
    expect(res.count).toBe(14 * 32);
    expect(res.maxAbsDiff).toBeLessThan(1e-8);
  });

  it("evaluates single harmonics against closed forms", () => {
    // Y_1^0 = sqrt(3/(4 pi)) mu ; Y_1^1 = sqrt(3/(4 pi)) sin(theta) cos(lam)
    const lmax = 4;
    const coeffs = new Float64Array((lmax + 1) * (lmax + 1));
    coeffs[sphIndex(1, 0)] = 1;
    const c = Math.sqrt(3 / (4 * Math.PI));
    for (const mu of [-0.9, -0.3, 0.2, 0.8]) {
      expect(synthesizeAt(coeffs, lmax, mu, 1.1)).toBeCloseTo(c * mu, 12);
    }
    coeffs[sphIndex(1, 0)] = 0;
    coeffs[sphIndex(1, 1)] = 1;
    for (const [mu, lam] of [
      [0.3, 0.7],
      [-0.5, 2.9],
    ] as const) {
      const want = c * Math.sqrt(1 - mu * mu) * Math.cos(lam);
      expect(synthesizeAt(coeffs, lmax, mu, lam)).toBeCloseTo(want, 12);
    }
  });

  it("legendre columns are orthonormal under quadrature", () => {
    // crude uniform-grid check: int Pbar_2^1 Pbar_3^1 dmu ~ 0, int (Pbar_2^1)^2 ~ 1
    const n = 20000;
    let i22 = 0;
    let i23 = 0;
    for (let k = 0; k < n; k++) {
      const mu = -1 + (2 * (k + 0.5)) / n;
      const tab = legendreColumns(3, mu);
      const p21 = tab[1][1];
      const p31 = tab[1][2];
      i22 += (p21 * p21 * 2) / n;
      i23 += (p21 * p31 * 2) / n;
    }
    expect(i22).toBeCloseTo(1.0, 6);
    expect(i23).toBeCloseTo(0.0, 6);
  });

  it("raster synthesis agrees with pointwise synthesis", () => {
    const snap = readSnapshot(join(FX, "random12.qgs"));
    const w = 16;
    const h = 8;
    const raster = synthesizeRaster(snap.coeffs, snap.header.lmax, w, h);
    const j = 3;
    const i = 11;
    const phi = Math.PI / 2 - (Math.PI * (j + 0.5)) / h;
    const lam = (2 * Math.PI * (i + 0.5)) / w;
    const direct = synthesizeAt(snap.coeffs, snap.header.lmax, Math.sin(phi), lam);
    expect(raster[j * w + i]).toBeCloseTo(direct, 10);
  });
});
