/**
 * Feature extraction: image folders -> DFEL feature files.
 *
 * Every readable image is resized (bilinear) to each backbone's native
 * input resolution, pushed through the backbone in batches, and the
 * global-average-pooled vectors are concatenated in job order. Labels
 * come from the class subfolder names; provenance records which columns
 * each backbone contributed. Rows are written in deterministic scan
 * order, so a rerun with the same inputs produces an identical file.
 */

import * as tf from "@tensorflow/tfjs";

import { Backbone, BackboneSpec, WeightSource, loadBackbone, resolveBackbones } from "./backbones";
import { FeatureFile, ProvenanceSpan, writeFeatureFile } from "./dfel";
import { JobError, RgbImage, decodeImage, scanImageTree } from "./images";
import { saturationFilter } from "./saturation";

export interface ExtractionJob {
  imageRoot: string;
  backbones: string[];
  outputPath: string;
  batchSize?: number;
  weightSource?: WeightSource;
  modelBaseUrl?: string;
  /** discard near-achromatic (background) patches before extraction */
  applySaturationFilter?: boolean;
  log?: (message: string) => void;
}

export interface ExtractionSummary {
  nImages: number;
  nSkipped: number;
  nFiltered: number;
  nDims: number;
  classNames: string[];
  provenance: ProvenanceSpan[];
}

function resizeBatch(images: RgbImage[], size: number): tf.Tensor4D {
  return tf.tidy(() => {
    const resized = images.map((img) => {
      const t = tf.tensor3d(img.data, [img.height, img.width, 3]);
      const r =
        img.height === size && img.width === size
          ? t
          : tf.image.resizeBilinear(t, [size, size]);
      return r.sub(0.5); // center to [-0.5, 0.5]
    });
    return tf.stack(resized) as tf.Tensor4D;
  });
}

async function pooledFeatures(
  backbone: Backbone,
  images: RgbImage[],
): Promise<Float32Array> {
  const input = resizeBatch(images, backbone.spec.inputSize);
  const out = backbone.model.predict(input) as tf.Tensor;
  const data = (await out.data()) as Float32Array;
  input.dispose();
  out.dispose();
  return data;
}

export async function extractFeatures(job: ExtractionJob): Promise<ExtractionSummary> {
  const log = job.log ?? ((m: string) => console.warn(m));
  const batchSize = job.batchSize ?? 16;
  if (batchSize < 1) {
    throw new JobError(`batch size must be >= 1, got ${batchSize}`);
  }
  const specs: BackboneSpec[] = resolveBackbones(job.backbones);
  const source = job.weightSource ?? "seeded";
  const backbones: Backbone[] = [];
  for (const spec of specs) {
    backbones.push(await loadBackbone(spec, source, job.modelBaseUrl));
  }

  const nDims = specs.reduce((acc, s) => acc + s.pooledWidth, 0);
  const provenance: ProvenanceSpan[] = [];
  let offset = 0;
  for (const spec of specs) {
    provenance.push({ name: spec.name, start: offset, end: offset + spec.pooledWidth });
    offset += spec.pooledWidth;
  }

  const tree = scanImageTree(job.imageRoot);
  const rows: Float32Array[] = [];
  const labels: number[] = [];
  let nSkipped = 0;
  let nFiltered = 0;

  for (let start = 0; start < tree.entries.length; start += batchSize) {
    const slice = tree.entries.slice(start, start + batchSize);
    const images: RgbImage[] = [];
    const batchLabels: number[] = [];
    for (const entry of slice) {
      let img: RgbImage;
      try {
        img = decodeImage(entry.path);
      } catch (err) {
        nSkipped += 1;
        log(`warning: skipping unreadable image ${entry.path}: ${err}`);
        continue;
      }
      if (job.applySaturationFilter && !saturationFilter(img)) {
        nFiltered += 1;
        continue;
      }
      images.push(img);
      batchLabels.push(entry.label);
    }
    if (images.length === 0) continue;

    const perBackbone: Float32Array[] = [];
    for (const backbone of backbones) {
      perBackbone.push(await pooledFeatures(backbone, images));
    }
    for (let i = 0; i < images.length; i++) {
      const row = new Float32Array(nDims);
      let col = 0;
      backbones.forEach((backbone, b) => {
        const width = backbone.spec.pooledWidth;
        row.set(perBackbone[b].subarray(i * width, (i + 1) * width), col);
        col += width;
      });
      rows.push(row);
      labels.push(batchLabels[i]);
    }
  }

  if (rows.length === 0) {
    throw new JobError("no images survived decoding/filtering");
  }

  const values = new Float32Array(rows.length * nDims);
  rows.forEach((row, i) => values.set(row, i * nDims));
  const file: FeatureFile = {
    nSamples: rows.length,
    nDims,
    values,
    labels: Uint32Array.from(labels),
    classNames: tree.classNames,
    provenance,
  };
  writeFeatureFile(file, job.outputPath);
  if (nSkipped > 0) {
    log(`warning: ${nSkipped} unreadable image(s) skipped`);
  }
  return {
    nImages: rows.length,
    nSkipped,
    nFiltered,
    nDims,
    classNames: tree.classNames,
    provenance,
  };
}
