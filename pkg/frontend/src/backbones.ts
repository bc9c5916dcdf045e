/**
 * Convolutional backbones and their pooled-feature heads.
 *
 * Each registry entry fixes a backbone's native input resolution and the
 * channel count of its global-average-pooling output; the six supported
 * networks concatenate to 512+512+2048+2048+1024+1024 = 7168 dims.
 * The DenseNet entry is the 121-layer configuration (1024 channels).
 *
 * Two weight sources:
 *  - "remote": a real pretrained feature extractor loaded with
 *    tf.loadLayersModel from `<modelBaseUrl>/<name>/model.json`; the model
 *    must end in (or contain) a global-average-pooling layer.
 *  - "seeded": an offline stand-in with the same input/output contract,
 *    weights derived deterministically from the backbone name, for
 *    air-gapped runs and tests. Feature *quality* tracks the weights, the
 *    pipeline (resize, batching, pooling, file layout) is identical.
 */

import * as tf from "@tensorflow/tfjs";

import { JobError } from "./images";
import { WeightStream, fnv1a } from "./rng";

export interface BackboneSpec {
  name: string;
  inputSize: number;
  pooledWidth: number;
}

export const BACKBONES: Record<string, BackboneSpec> = {
  vgg16: { name: "vgg16", inputSize: 224, pooledWidth: 512 },
  vgg19: { name: "vgg19", inputSize: 224, pooledWidth: 512 },
  xception: { name: "xception", inputSize: 299, pooledWidth: 2048 },
  resnet50: { name: "resnet50", inputSize: 224, pooledWidth: 2048 },
  mobilenet: { name: "mobilenet", inputSize: 224, pooledWidth: 1024 },
  densenet: { name: "densenet", inputSize: 224, pooledWidth: 1024 },
};

export type WeightSource = "seeded" | "remote";

export function resolveBackbones(names: string[]): BackboneSpec[] {
  if (names.length === 0) {
    throw new JobError("backbone list is empty");
  }
  return names.map((raw) => {
    const spec = BACKBONES[raw.trim().toLowerCase()];
    if (!spec) {
      throw new JobError(
        `unknown backbone "${raw}" (expected one of ${Object.keys(BACKBONES).join(", ")})`,
      );
    }
    return spec;
  });
}

export interface Backbone {
  spec: BackboneSpec;
  /** batched [n, size, size, 3] float input in [-0.5, 0.5] -> [n, pooledWidth] */
  model: tf.LayersModel;
}

function convRelu(filters: number): tf.layers.Layer {
  return tf.layers.conv2d({
    filters,
    kernelSize: 3,
    strides: 2,
    padding: "same",
    activation: "relu",
    useBias: true,
  });
}

/** Deterministic stand-in backbone: pooled conv stack ending in GAP. */
export function buildSeededBackbone(spec: BackboneSpec): Backbone {
  const stream = new WeightStream(fnv1a(`dfel-backbone:${spec.name}`));
  const pool = Math.floor(spec.inputSize / 14);
  const model = tf.sequential({
    layers: [
      tf.layers.averagePooling2d({
        inputShape: [spec.inputSize, spec.inputSize, 3],
        poolSize: pool,
        strides: pool,
        padding: "valid",
      }),
      convRelu(64),
      convRelu(256),
      convRelu(spec.pooledWidth),
      tf.layers.globalAveragePooling2d({}),
    ],
  });
  // overwrite the default init with name-seeded weights (He-scaled)
  for (const layer of model.layers) {
    const weights = layer.getWeights();
    if (weights.length === 0) continue;
    const replaced = weights.map((w) => {
      const n = w.size;
      const shape = w.shape;
      if (shape.length === 4) {
        const fanIn = shape[0] * shape[1] * shape[2];
        const scale = Math.sqrt(2.0 / fanIn);
        const vals = stream.normals(n);
        for (let i = 0; i < n; i++) vals[i] *= scale;
        return tf.tensor(vals, shape as number[]);
      }
      // biases: small noise so ReLU units decorrelate
      const vals = stream.normals(n);
      for (let i = 0; i < n; i++) vals[i] *= 0.01;
      return tf.tensor(vals, shape as number[]);
    });
    layer.setWeights(replaced);
    replaced.forEach((t) => t.dispose());
  }
  return { spec, model };
}

/** Load a pretrained feature extractor and cut it at its GAP output. */
export async function loadRemoteBackbone(
  spec: BackboneSpec,
  modelBaseUrl: string,
): Promise<Backbone> {
  const url = `${modelBaseUrl.replace(/\/$/, "")}/${spec.name}/model.json`;
  const loaded = await tf.loadLayersModel(url);
  const gap = loaded.layers.find((l) =>
    l.name.includes("global_average_pooling2d"),
  );
  const model = gap
    ? tf.model({ inputs: loaded.inputs, outputs: gap.output as tf.SymbolicTensor })
    : loaded;
  const outShape = model.outputs[0].shape;
  const width = outShape[outShape.length - 1];
  if (width !== spec.pooledWidth) {
    throw new JobError(
      `${spec.name}: pooled width ${width} != expected ${spec.pooledWidth}`,
    );
  }
  return { spec, model: model as tf.LayersModel };
}

export async function loadBackbone(
  spec: BackboneSpec,
  source: WeightSource,
  modelBaseUrl?: string,
): Promise<Backbone> {
  if (source === "seeded") {
    return buildSeededBackbone(spec);
  }
  if (!modelBaseUrl) {
    throw new JobError("remote weights need a model base URL");
  }
  return loadRemoteBackbone(spec, modelBaseUrl);
}
