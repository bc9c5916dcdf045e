/**
 * HSV background filter for histopathology patches.
 *
 * Tissue regions carry stain color while background is near-achromatic,
 * so a patch whose *maximum* pixel saturation stays below 0.07 is
 * considered background and discarded.
 */

import { RgbImage } from "./images";

export const SATURATION_THRESHOLD = 0.07;

/** Maximum HSV saturation over all pixels (S = (max-min)/max, 0 if black). */
export function maxSaturation(img: RgbImage): number {
  let best = 0;
  const d = img.data;
  for (let p = 0; p < img.width * img.height; p++) {
    const r = d[3 * p];
    const g = d[3 * p + 1];
    const b = d[3 * p + 2];
    const hi = Math.max(r, g, b);
    const lo = Math.min(r, g, b);
    const s = hi > 0 ? (hi - lo) / hi : 0;
    if (s > best) best = s;
  }
  return best;
}

/** true = keep the patch, false = discard as background. */
export function saturationFilter(img: RgbImage): boolean {
  if (img.width === 0 || img.height === 0) {
    throw new Error("empty image");
  }
  return maxSaturation(img) >= SATURATION_THRESHOLD;
}
