/**
 * UOFV1 feature file encoding.
 *
 * Layout (little-endian): magic "UOFV", version byte 0x01, uint32 layer
 * count L, uint32 sample count N, then per layer a uint32 width D followed
 * by N*D float32 values, row-major. Layer order in the file equals layer
 * order in memory (shallow to deep).
 */

import * as fs from 'fs';
import * as os from 'os';

export const MAGIC = 'UOFV';
export const VERSION = 1;

export interface FeatureLayer {
  dim: number;
  /** Row-major N x dim values. */
  data: Float32Array;
}

function floatPayload(data: Float32Array): Buffer {
  if (os.endianness() === 'LE') {
    return Buffer.from(data.buffer, data.byteOffset, data.byteLength);
  }
  const out = Buffer.alloc(data.length * 4);
  for (let i = 0; i < data.length; i++) out.writeFloatLE(data[i], i * 4);
  return out;
}

export function encodeFeatures(layers: FeatureLayer[], sampleCount: number): Buffer {
  if (layers.length < 1) throw new Error('need at least one layer');
  if (sampleCount < 1) throw new Error('need at least one sample');
  const parts: Buffer[] = [];
  const header = Buffer.alloc(4 + 1 + 8);
  header.write(MAGIC, 0, 'ascii');
  header.writeUInt8(VERSION, 4);
  header.writeUInt32LE(layers.length, 5);
  header.writeUInt32LE(sampleCount, 9);
  parts.push(header);
  for (const layer of layers) {
    if (layer.dim < 1) throw new Error('layer width must be at least 1');
    if (layer.data.length !== sampleCount * layer.dim) {
      throw new Error(
        `layer payload has ${layer.data.length} values, ` +
        `expected ${sampleCount} x ${layer.dim}`,
      );
    }
    for (const v of layer.data) {
      if (!Number.isFinite(v)) throw new Error('non-finite feature value');
    }
    const dimHeader = Buffer.alloc(4);
    dimHeader.writeUInt32LE(layer.dim, 0);
    parts.push(dimHeader, floatPayload(layer.data));
  }
  return Buffer.concat(parts);
}

export function writeFeatures(
  path: string,
  layers: FeatureLayer[],
  sampleCount: number,
): void {
  fs.writeFileSync(path, encodeFeatures(layers, sampleCount));
}

export interface DecodedFeatures {
  sampleCount: number;
  layers: FeatureLayer[];
}

/** Strict decoder, used by the round-trip tests. */
export function decodeFeatures(raw: Buffer): DecodedFeatures {
  if (raw.length < 13) throw new Error('file shorter than the preamble');
  if (raw.toString('ascii', 0, 4) !== MAGIC || raw.readUInt8(4) !== VERSION) {
    throw new Error('bad magic or version');
  }
  const layerCount = raw.readUInt32LE(5);
  const sampleCount = raw.readUInt32LE(9);
  if (layerCount === 0 || sampleCount === 0) throw new Error('zero dimension');
  let offset = 13;
  const layers: FeatureLayer[] = [];
  for (let i = 0; i < layerCount; i++) {
    if (raw.length < offset + 4) throw new Error(`layer ${i} header missing`);
    const dim = raw.readUInt32LE(offset);
    offset += 4;
    if (dim === 0) throw new Error(`layer ${i} has zero width`);
    const count = sampleCount * dim;
    if (raw.length < offset + count * 4) throw new Error(`layer ${i} payload ends early`);
    const data = new Float32Array(count);
    for (let j = 0; j < count; j++) data[j] = raw.readFloatLE(offset + j * 4);
    offset += count * 4;
    layers.push({ dim, data });
  }
  if (offset !== raw.length) throw new Error('trailing bytes');
  return { sampleCount, layers };
}

export function readFeatures(path: string): DecodedFeatures {
  return decodeFeatures(fs.readFileSync(path));
}
