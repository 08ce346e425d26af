/**
 * Backbones: pretrained or stub CNNs exposing multi-scale tap outputs.
 *
 * A backbone maps an NHWC batch to one feature-map tensor per tap point,
 * ordered shallow to deep. Real use loads a converted pretrained graph
 * model from disk (the network is used as-is, never trained or tuned); the
 * stub backbone is a small seeded conv pyramid for exercising the pipeline
 * without weights.
 */

import * as fs from 'fs';
import * as path from 'path';
import * as tf from '@tensorflow/tfjs';

export interface BackboneSpec {
  name: string;
  /** Square input resolution the images are resized to. */
  inputSize: number;
  /** Expected channel width of each tap output, shallow to deep. */
  tapDims: readonly number[];
}

/**
 * Known architectures. Input sizes are fixed per backbone; tap points are
 * the outputs of the main stages.
 */
export const BACKBONE_SPECS: Record<string, BackboneSpec> = {
  resnet101: { name: 'resnet101', inputSize: 224, tapDims: [256, 512, 1024, 2048] },
  efficientnet_b4: {
    name: 'efficientnet_b4',
    inputSize: 380,
    tapDims: [24, 32, 56, 112, 160, 272, 448],
  },
};

export interface Backbone {
  readonly spec: BackboneSpec;
  /** One NHWC feature map per tap, shallow to deep. Caller disposes. */
  forward(batch: tf.Tensor4D): tf.Tensor[];
  dispose(): void;
}

export const STUB_SPEC: BackboneSpec = {
  name: 'stub',
  inputSize: 32,
  tapDims: [8, 16, 32, 64],
};

/**
 * Deterministic four-stage conv pyramid with seeded weights. Stage s halves
 * the resolution and outputs tapDims[s] channels.
 */
export function buildStubBackbone(seed = 7, spec: BackboneSpec = STUB_SPEC): Backbone {
  const input = tf.input({ shape: [spec.inputSize, spec.inputSize, 3] });
  const taps: tf.SymbolicTensor[] = [];
  let x: tf.SymbolicTensor = input;
  spec.tapDims.forEach((filters, stage) => {
    x = tf.layers
      .conv2d({
        filters,
        kernelSize: 3,
        strides: 2,
        padding: 'same',
        activation: 'relu',
        kernelInitializer: tf.initializers.heNormal({ seed: seed + stage }),
        biasInitializer: 'zeros',
        name: `stage_${stage + 1}`,
      })
      .apply(x) as tf.SymbolicTensor;
    taps.push(x);
  });
  const model = tf.model({ inputs: input, outputs: taps });
  return {
    spec,
    forward: (batch) => {
      const outputs = model.predict(batch);
      return Array.isArray(outputs) ? outputs : [outputs];
    },
    dispose: () => model.dispose(),
  };
}

/** IO handler for tfjs graph models saved on the local filesystem. */
function localModelHandler(modelDir: string): tf.io.IOHandler {
  return {
    load: async () => {
      const modelJson = JSON.parse(
        fs.readFileSync(path.join(modelDir, 'model.json'), 'utf-8'),
      );
      const manifest = modelJson.weightsManifest ?? [];
      const specs: tf.io.WeightsManifestEntry[] = [];
      const buffers: Buffer[] = [];
      for (const group of manifest) {
        specs.push(...group.weights);
        for (const relative of group.paths) {
          buffers.push(fs.readFileSync(path.join(modelDir, relative)));
        }
      }
      const weights = Buffer.concat(buffers);
      return {
        modelTopology: modelJson.modelTopology,
        format: modelJson.format,
        generatedBy: modelJson.generatedBy,
        convertedBy: modelJson.convertedBy,
        weightSpecs: specs,
        weightData: weights.buffer.slice(
          weights.byteOffset,
          weights.byteOffset + weights.byteLength,
        ),
      };
    },
  };
}

/**
 * Load a converted pretrained model and expose the named tap outputs.
 *
 * The channel width of every tap is asserted against the architecture's
 * expected stage widths on the first forward pass.
 */
export async function loadGraphBackbone(
  modelDir: string,
  spec: BackboneSpec,
  tapNames: string[],
): Promise<Backbone> {
  if (tapNames.length !== spec.tapDims.length) {
    throw new Error(
      `${spec.name} expects ${spec.tapDims.length} tap outputs, got ${tapNames.length}`,
    );
  }
  const model = await tf.loadGraphModel(localModelHandler(modelDir));
  return {
    spec,
    forward: (batch) => {
      const outputs = model.execute(batch, tapNames);
      return Array.isArray(outputs) ? outputs : [outputs];
    },
    dispose: () => model.dispose(),
  };
}

/** Verify tap feature maps match the declared stage widths. */
export function assertTapShapes(spec: BackboneSpec, taps: tf.Tensor[]): void {
  if (taps.length !== spec.tapDims.length) {
    throw new Error(
      `${spec.name}: got ${taps.length} tap outputs, expected ${spec.tapDims.length}`,
    );
  }
  taps.forEach((tensor, i) => {
    const channels = tensor.shape[tensor.shape.length - 1];
    if (channels !== spec.tapDims[i]) {
      throw new Error(
        `${spec.name}: tap ${i + 1} has ${channels} channels, ` +
        `expected ${spec.tapDims[i]}`,
      );
    }
  });
}
