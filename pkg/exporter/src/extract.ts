/**
 * Extraction pipeline: images -> backbone taps -> pooled rows -> UOFV1.
 *
 * Every readable image contributes one row per tap layer: the global
 * average of the tap's feature map over its spatial dimensions. Unreadable
 * images are skipped with a warning and recorded in a sidecar manifest;
 * extraction aborts if no image survives.
 */

import * as fs from 'fs';
import * as path from 'path';
import * as tf from '@tensorflow/tfjs';

import { Backbone, assertTapShapes } from './backbone';
import { prepareImage } from './image';
import { FeatureLayer, writeFeatures } from './uofv1';

export interface ExtractorConfig {
  backbone: Backbone;
  /** Image paths in extraction order. */
  images: string[];
  outPath: string;
  batchSize: number;
  /** Warning sink; defaults to stderr. */
  warn?: (message: string) => void;
}

export interface SkipRecord {
  path: string;
  reason: string;
}

export interface ExtractResult {
  outPath: string;
  sampleCount: number;
  skipped: SkipRecord[];
  /** Written next to outPath when any image was skipped. */
  skippedManifestPath: string | null;
}

const IMAGE_EXTENSIONS = new Set(['.png', '.jpg', '.jpeg']);

/**
 * Resolve an image source: a directory (scanned for image files, sorted) or
 * a list file with one path per line, resolved against the list's location.
 */
export function listImages(source: string): string[] {
  const stat = fs.statSync(source);
  if (stat.isDirectory()) {
    return fs
      .readdirSync(source)
      .filter((name) => IMAGE_EXTENSIONS.has(path.extname(name).toLowerCase()))
      .sort()
      .map((name) => path.join(source, name));
  }
  const base = path.dirname(source);
  return fs
    .readFileSync(source, 'utf-8')
    .split('\n')
    .map((line) => line.trim())
    .filter((line) => line.length > 0)
    .map((line) => (path.isAbsolute(line) ? line : path.join(base, line)));
}

export async function extract(config: ExtractorConfig): Promise<ExtractResult> {
  const { backbone, images, outPath } = config;
  const warn = config.warn ?? ((message: string) => process.stderr.write(message + '\n'));
  if (images.length === 0) throw new Error('no input images');
  if (config.batchSize < 1) throw new Error('batch size must be at least 1');
  await tf.setBackend('cpu');
  await tf.ready();

  const size = backbone.spec.inputSize;
  const skipped: SkipRecord[] = [];
  const chunks: Float32Array[][] = backbone.spec.tapDims.map(() => []);
  let kept = 0;

  let batch: Float32Array[] = [];
  const flush = async () => {
    if (batch.length === 0) return;
    const flat = new Float32Array(batch.length * size * size * 3);
    batch.forEach((pixels, i) => flat.set(pixels, i * size * size * 3));
    const input = tf.tensor4d(flat, [batch.length, size, size, 3]);
    const taps = backbone.forward(input);
    assertTapShapes(backbone.spec, taps);
    for (let layer = 0; layer < taps.length; layer++) {
      const pooled = tf.mean(taps[layer], [1, 2]);
      chunks[layer].push((await pooled.data()) as Float32Array);
      pooled.dispose();
      taps[layer].dispose();
    }
    input.dispose();
    kept += batch.length;
    batch = [];
  };

  for (const imagePath of images) {
    let pixels: Float32Array;
    try {
      pixels = prepareImage(fs.readFileSync(imagePath), size);
    } catch (error) {
      const reason = error instanceof Error ? error.message : String(error);
      warn(`skipping ${imagePath}: ${reason}`);
      skipped.push({ path: imagePath, reason });
      continue;
    }
    batch.push(pixels);
    if (batch.length >= config.batchSize) await flush();
  }
  await flush();

  if (kept === 0) {
    throw new Error(`no readable images among ${images.length} inputs`);
  }

  const layers: FeatureLayer[] = backbone.spec.tapDims.map((dim, layer) => {
    const data = new Float32Array(kept * dim);
    let row = 0;
    for (const chunk of chunks[layer]) {
      data.set(chunk, row * dim);
      row += chunk.length / dim;
    }
    return { dim, data };
  });
  writeFeatures(outPath, layers, kept);

  let skippedManifestPath: string | null = null;
  if (skipped.length > 0) {
    skippedManifestPath = outPath + '.skipped.json';
    fs.writeFileSync(skippedManifestPath, JSON.stringify({ skipped }, null, 2) + '\n');
  }
  return { outPath, sampleCount: kept, skipped, skippedManifestPath };
}
