import * as tf from '@tensorflow/tfjs';
import * as fs from 'fs';
import * as path from 'path';
import { Ppm } from './ppm';

export class BadBackbone extends Error {}

export interface Backbone {
  name: string;
  inputSize: number;
  outputDim: number;
  model: tf.LayersModel;
}

export const OUTPUT_DIM = 4096;

function conv(filters: number, kernel: number, strides: number,
              padding: 'valid' | 'same', seed: number) {
  return tf.layers.conv2d({
    filters, kernelSize: kernel, strides, padding,
    activation: 'relu',
    kernelInitializer: tf.initializers.glorotUniform({ seed }),
    biasInitializer: 'zeros',
  });
}

function dense(units: number, seed: number) {
  return tf.layers.dense({
    units, activation: 'relu',
    kernelInitializer: tf.initializers.glorotUniform({ seed }),
    biasInitializer: 'zeros',
  });
}

// Krizhevsky-2012 single-tower geometry up to the last hidden layer;
// the 4096-wide activation feeding the classifier is the exported
// representation, so no softmax head is attached. Dropout is a
// training-time device and is omitted (inference only).
export function buildAlexNet(seed: number): tf.LayersModel {
  const model = tf.sequential();
  model.add(tf.layers.inputLayer({ inputShape: [227, 227, 3] }));
  model.add(conv(96, 11, 4, 'valid', seed));
  model.add(tf.layers.maxPooling2d({ poolSize: 3, strides: 2 }));
  model.add(conv(256, 5, 1, 'same', seed + 1));
  model.add(tf.layers.maxPooling2d({ poolSize: 3, strides: 2 }));
  model.add(conv(384, 3, 1, 'same', seed + 2));
  model.add(conv(384, 3, 1, 'same', seed + 3));
  model.add(conv(256, 3, 1, 'same', seed + 4));
  model.add(tf.layers.maxPooling2d({ poolSize: 3, strides: 2 }));
  model.add(tf.layers.flatten());
  model.add(dense(OUTPUT_DIM, seed + 5));
  model.add(dense(OUTPUT_DIM, seed + 6));
  return model;
}

// Small smoke-test backbone (not from any publication): same output
// width, a fraction of the compute. Useful for pipeline checks.
export function buildTinyNet(seed: number): tf.LayersModel {
  const model = tf.sequential();
  model.add(tf.layers.inputLayer({ inputShape: [32, 32, 3] }));
  model.add(conv(8, 3, 1, 'same', seed));
  model.add(tf.layers.maxPooling2d({ poolSize: 2, strides: 2 }));
  model.add(conv(16, 3, 1, 'same', seed + 1));
  model.add(tf.layers.globalAveragePooling2d({}));
  model.add(dense(OUTPUT_DIM, seed + 2));
  return model;
}

const BUILDERS: Record<string, (seed: number) => tf.LayersModel> = {
  alexnet: buildAlexNet,
  tiny: buildTinyNet,
};

export const BACKBONE_NAMES = Object.keys(BUILDERS);

export async function saveModelToDir(model: tf.LayersModel, dir: string): Promise<void> {
  fs.mkdirSync(dir, { recursive: true });
  await model.save({
    save: async artifacts => {
      const weightData = artifacts.weightData as ArrayBuffer;
      fs.writeFileSync(path.join(dir, 'weights.bin'), Buffer.from(weightData));
      fs.writeFileSync(path.join(dir, 'model.json'), JSON.stringify({
        modelTopology: artifacts.modelTopology,
        format: 'layers-model',
        weightsManifest: [{ paths: ['weights.bin'], weights: artifacts.weightSpecs }],
      }));
      return { modelArtifactsInfo: { dateSaved: new Date(), modelTopologyType: 'JSON' } };
    },
  });
}

// Plain-tfjs stand-in for the node filesystem IO handler: reads a
// model.json plus weight shards saved by saveModelToDir (or any
// layers-model export).
export async function loadModelFromDir(dir: string): Promise<tf.LayersModel> {
  const spec = JSON.parse(fs.readFileSync(path.join(dir, 'model.json'), 'utf-8'));
  const manifest = spec.weightsManifest;
  if (!spec.modelTopology || !Array.isArray(manifest)) {
    throw new BadBackbone(`${dir}: not a layers-model directory`);
  }
  const weightSpecs = manifest.flatMap(
    (g: { weights: tf.io.WeightsManifestEntry[] }) => g.weights);
  const shards = manifest.flatMap((g: { paths: string[] }) => g.paths)
    .map((p: string) => fs.readFileSync(path.join(dir, p)));
  const weightData = new Uint8Array(Buffer.concat(shards)).buffer;
  return tf.loadLayersModel({
    load: async () => ({ modelTopology: spec.modelTopology, weightSpecs, weightData }),
  });
}

export async function loadBackbone(name: string, seed: number,
                                   weightsDir?: string): Promise<Backbone> {
  let model: tf.LayersModel;
  if (weightsDir !== undefined) {
    model = await loadModelFromDir(weightsDir);
  } else {
    const builder = BUILDERS[name];
    if (builder === undefined) {
      throw new BadBackbone(`unknown backbone ${name!}; choices: ${BACKBONE_NAMES.join(', ')}`);
    }
    model = builder(seed);
  }
  const outShape = model.outputs[0].shape;
  const outputDim = outShape[outShape.length - 1];
  if (outputDim !== OUTPUT_DIM) {
    throw new BadBackbone(`backbone emits dim ${outputDim}, expected ${OUTPUT_DIM}`);
  }
  const inShape = model.inputs[0].shape;
  const inputSize = inShape[1];
  if (inputSize == null || inShape[2] !== inputSize || inShape[3] !== 3) {
    throw new BadBackbone(`backbone wants input ${JSON.stringify(inShape)}, expected square RGB`);
  }
  return { name, inputSize, outputDim: OUTPUT_DIM, model };
}

/** Activations for a batch of images, row i for images[i]. */
export function batchActivations(backbone: Backbone, images: Ppm[]): Float32Array {
  if (images.length === 0) return new Float32Array(0);
  const out = tf.tidy(() => {
    const inputs = images.map(img => {
      const scaled = new Float32Array(img.pixels.length);
      for (let i = 0; i < img.pixels.length; i++) scaled[i] = img.pixels[i] / 255;
      const t = tf.tensor3d(scaled, [img.height, img.width, 3]);
      return tf.image.resizeBilinear(t, [backbone.inputSize, backbone.inputSize]);
    });
    const batch = tf.stack(inputs);
    return backbone.model.predict(batch, { batchSize: 16 }) as tf.Tensor;
  });
  const data = out.dataSync() as Float32Array;
  out.dispose();
  return data;
}
