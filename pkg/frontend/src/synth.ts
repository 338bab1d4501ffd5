/**
 * Independent synthesis of real spherical-harmonic coefficient arrays at
 * arbitrary points.  Deliberately a from-scratch implementation of the
 * basis convention (orthonormal real harmonics, no Condon-Shortley phase,
 * l-major layout) so it double-checks both the file format and the
 * primary implementation's math.
 */

import { sphIndex } from "./snapshot.js";

const SQRT_2PI = Math.sqrt(2 * Math.PI);
const SQRT_PI = Math.sqrt(Math.PI);

/**
 * Normalized associated Legendre values Pbar_l^m(mu) for all 0<=m<=l<=lmax,
 * returned as tab[m][l - m] to keep rows dense.
 */
export function legendreColumns(lmax: number, mu: number): Float64Array[] {
  const sinT = Math.sqrt(Math.max(0, 1 - mu * mu));
  const tab: Float64Array[] = [];
  let pmm = Math.sqrt(0.5);
  for (let m = 0; m <= lmax; m++) {
    if (m > 0) {
      pmm *= Math.sqrt((2 * m + 1) / (2 * m)) * sinT;
    }
    const row = new Float64Array(lmax - m + 1);
    row[0] = pmm;
    if (m + 1 <= lmax) {
      row[1] = Math.sqrt(2 * m + 3) * mu * pmm;
    }
    for (let l = m + 2; l <= lmax; l++) {
      const aL = Math.sqrt((4 * l * l - 1) / (l * l - m * m));
      const aLm1 = Math.sqrt((4 * (l - 1) * (l - 1) - 1) / ((l - 1) * (l - 1) - m * m));
      row[l - m] = aL * (mu * row[l - 1 - m] - row[l - 2 - m] / aLm1);
    }
    tab.push(row);
  }
  return tab;
}

/** Evaluate the field at a single (mu, lambda). */
export function synthesizeAt(coeffs: Float64Array, lmax: number, mu: number, lam: number): number {
  const tab = legendreColumns(lmax, mu);
  let total = 0;
  for (let m = 0; m <= lmax; m++) {
    const scale = m === 0 ? 1 / SQRT_2PI : 1 / SQRT_PI;
    const cosm = Math.cos(m * lam);
    const sinm = Math.sin(m * lam);
    const row = tab[m];
    for (let l = m; l <= lmax; l++) {
      const p = row[l - m] * scale;
      total += p * coeffs[sphIndex(l, m)] * cosm;
      if (m > 0) {
        total += p * coeffs[sphIndex(l, -m)] * sinm;
      }
    }
  }
  return total;
}

/**
 * Synthesize on a longitude-latitude plotting raster: row j has latitude
 * phi = 90 - 180*(j+0.5)/H degrees (north at the top), column i longitude
 * lam = 360*(i+0.5)/W degrees.  Returns row-major values.
 */
export function synthesizeRaster(
  coeffs: Float64Array,
  lmax: number,
  width: number,
  height: number,
): Float64Array {
  const out = new Float64Array(width * height);
  const lams = new Float64Array(width);
  for (let i = 0; i < width; i++) {
    lams[i] = (2 * Math.PI * (i + 0.5)) / width;
  }
  for (let j = 0; j < height; j++) {
    const phi = Math.PI / 2 - (Math.PI * (j + 0.5)) / height;
    const mu = Math.sin(phi);
    const tab = legendreColumns(lmax, mu);
    // per-latitude Fourier coefficients, then the longitude sweep
    const am = new Float64Array(lmax + 1);
    const bm = new Float64Array(lmax + 1);
    for (let m = 0; m <= lmax; m++) {
      const scale = m === 0 ? 1 / SQRT_2PI : 1 / SQRT_PI;
      const row = tab[m];
      let a = 0;
      let b = 0;
      for (let l = m; l <= lmax; l++) {
        const p = row[l - m] * scale;
        a += p * coeffs[sphIndex(l, m)];
        if (m > 0) {
          b += p * coeffs[sphIndex(l, -m)];
        }
      }
      am[m] = a;
      bm[m] = b;
    }
    for (let i = 0; i < width; i++) {
      let v = am[0];
      for (let m = 1; m <= lmax; m++) {
        v += am[m] * Math.cos(m * lams[i]) + bm[m] * Math.sin(m * lams[i]);
      }
      out[j * width + i] = v;
    }
  }
  return out;
}
