/** Colormaps for field maps: a symmetric diverging map (blue-white-red)
 *  and a sequential one, both as simple piecewise-linear ramps. */

import type { Color } from "./raster.js";

function lerp(a: number, b: number, t: number): number {
  return Math.round(a + (b - a) * t);
}

function ramp(stops: [number, Color][], t: number): Color {
  const x = Math.min(1, Math.max(0, t));
  for (let i = 1; i < stops.length; i++) {
    const [t0, c0] = stops[i - 1];
    const [t1, c1] = stops[i];
    if (x <= t1) {
      const u = t1 === t0 ? 0 : (x - t0) / (t1 - t0);
      return [lerp(c0[0], c1[0], u), lerp(c0[1], c1[1], u), lerp(c0[2], c1[2], u)];
    }
  }
  return stops[stops.length - 1][1];
}

const RDBU_STOPS: [number, Color][] = [
  [0.0, [33, 62, 156]],
  [0.25, [97, 149, 219]],
  [0.5, [247, 247, 247]],
  [0.75, [229, 120, 95]],
  [1.0, [164, 20, 20]],
];

const VIRIDIS_STOPS: [number, Color][] = [
  [0.0, [68, 1, 84]],
  [0.25, [59, 82, 139]],
  [0.5, [33, 145, 140]],
  [0.75, [94, 201, 98]],
  [1.0, [253, 231, 37]],
];

export type ColormapName = "rdbu" | "viridis";

export function colormap(name: ColormapName, t: number): Color {
  return ramp(name === "viridis" ? VIRIDIS_STOPS : RDBU_STOPS, t);
}
