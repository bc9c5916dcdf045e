/** Programmatic PNG fixtures: small labeled image trees with class signal. */

import * as fs from "fs";
import * as path from "path";

import { PNG } from "pngjs";

import { WeightStream, fnv1a } from "../src/rng";

export function writePng(
  filePath: string,
  width: number,
  height: number,
  pixel: (x: number, y: number) => [number, number, number],
): void {
  const png = new PNG({ width, height });
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const [r, g, b] = pixel(x, y);
      const idx = 4 * (y * width + x);
      png.data[idx] = r;
      png.data[idx + 1] = g;
      png.data[idx + 2] = b;
      png.data[idx + 3] = 255;
    }
  }
  fs.writeFileSync(filePath, PNG.sync.write(png));
}

const CLASS_COLORS: Array<[number, number, number]> = [
  [200, 60, 60],
  [60, 180, 80],
  [70, 90, 210],
  [210, 190, 60],
];

/** class-per-subfolder tree of small PNGs with per-class color + texture */
export function makeImageTree(
  root: string,
  nClasses: number,
  perClass: number,
  size = 32,
): string[] {
  const classNames: string[] = [];
  for (let c = 0; c < nClasses; c++) {
    const cls = `class_${String.fromCharCode(97 + c)}`;
    classNames.push(cls);
    const dir = path.join(root, cls);
    fs.mkdirSync(dir, { recursive: true });
    const [br, bg, bb] = CLASS_COLORS[c % CLASS_COLORS.length];
    for (let i = 0; i < perClass; i++) {
      const rng = new WeightStream(fnv1a(`${cls}:${i}`));
      const phase = rng.next() * size;
      writePng(path.join(dir, `img_${String(i).padStart(3, "0")}.png`), size, size, (x, y) => {
        const stripe = (x + y + phase) % 8 < 4 ? 30 : -30;
        const noise = () => (rng.next() - 0.5) * 40;
        const clip = (v: number) => Math.max(0, Math.min(255, Math.round(v)));
        return [clip(br + stripe + noise()), clip(bg + stripe + noise()), clip(bb + stripe + noise())];
      });
    }
  }
  return classNames;
}
