/**
 * Image-folder scanning and decoding.
 *
 * Datasets use the class-per-subfolder layout: every direct subdirectory
 * of the root is one class, and its files are the class's images. Class
 * order (and therefore label indices) is the sorted subfolder order;
 * files sort within each class, so row order is deterministic.
 */

import * as fs from "fs";
import * as path from "path";

import * as jpeg from "jpeg-js";
import { PNG } from "pngjs";

export class JobError extends Error {}

export interface RgbImage {
  width: number;
  height: number;
  /** row-major RGB, values in [0, 1] */
  data: Float32Array;
}

export interface ImageEntry {
  path: string;
  label: number;
}

export interface ImageTree {
  classNames: string[];
  entries: ImageEntry[];
}

const IMAGE_EXTENSIONS = new Set([".png", ".jpg", ".jpeg"]);

export function scanImageTree(root: string): ImageTree {
  if (!fs.existsSync(root) || !fs.statSync(root).isDirectory()) {
    throw new JobError(`image root is not a directory: ${root}`);
  }
  const classNames = fs
    .readdirSync(root)
    .filter((d) => fs.statSync(path.join(root, d)).isDirectory())
    .sort();
  if (classNames.length === 0) {
    throw new JobError(`no class subfolders under ${root}`);
  }
  const entries: ImageEntry[] = [];
  classNames.forEach((cls, label) => {
    const dir = path.join(root, cls);
    const files = fs
      .readdirSync(dir)
      .filter((f) => IMAGE_EXTENSIONS.has(path.extname(f).toLowerCase()))
      .sort();
    if (files.length === 0) {
      throw new JobError(`class folder has no images: ${dir}`);
    }
    for (const f of files) {
      entries.push({ path: path.join(dir, f), label });
    }
  });
  return { classNames, entries };
}

function rgbaToRgb(width: number, height: number, rgba: Uint8Array): RgbImage {
  const data = new Float32Array(width * height * 3);
  for (let p = 0; p < width * height; p++) {
    data[3 * p] = rgba[4 * p] / 255;
    data[3 * p + 1] = rgba[4 * p + 1] / 255;
    data[3 * p + 2] = rgba[4 * p + 2] / 255;
  }
  return { width, height, data };
}

/** Decode a PNG or JPEG file to RGB floats; throws on anything unreadable. */
export function decodeImage(filePath: string): RgbImage {
  const raw = fs.readFileSync(filePath);
  const ext = path.extname(filePath).toLowerCase();
  if (ext === ".png") {
    const png = PNG.sync.read(raw);
    return rgbaToRgb(png.width, png.height, png.data);
  }
  if (ext === ".jpg" || ext === ".jpeg") {
    const img = jpeg.decode(raw, { useTArray: true, formatAsRGBA: true });
    return rgbaToRgb(img.width, img.height, img.data);
  }
  throw new JobError(`unsupported image extension: ${filePath}`);
}
