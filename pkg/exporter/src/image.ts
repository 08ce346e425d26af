/**
 * Image decoding and preprocessing for backbone inference.
 *
 * PNG and JPEG are decoded by file signature; both codecs expand grayscale
 * to RGBA, so single-channel inputs arrive with the gray value replicated
 * across the color channels and need no special casing downstream. Pixels
 * are converted to RGB floats in [0, 1], resized bilinearly (half-pixel
 * centers), and normalized per channel with the pretraining dataset's
 * statistics.
 */

import * as jpeg from 'jpeg-js';
import { PNG } from 'pngjs';

export interface RgbImage {
  width: number;
  height: number;
  /** Interleaved RGB floats in [0, 1], length width * height * 3. */
  data: Float32Array;
}

/** Per-channel statistics of the usual pretraining corpus. */
export const CHANNEL_MEAN = [0.485, 0.456, 0.406];
export const CHANNEL_STD = [0.229, 0.224, 0.225];

const PNG_SIGNATURE = Buffer.from([0x89, 0x50, 0x4e, 0x47]);

function rgbaToRgbFloats(rgba: Uint8Array | Buffer, pixels: number): Float32Array {
  const out = new Float32Array(pixels * 3);
  for (let i = 0; i < pixels; i++) {
    out[i * 3] = rgba[i * 4] / 255;
    out[i * 3 + 1] = rgba[i * 4 + 1] / 255;
    out[i * 3 + 2] = rgba[i * 4 + 2] / 255;
  }
  return out;
}

export function decodeImage(raw: Buffer): RgbImage {
  if (raw.length >= 4 && raw.subarray(0, 4).equals(PNG_SIGNATURE)) {
    const png = PNG.sync.read(raw);
    return {
      width: png.width,
      height: png.height,
      data: rgbaToRgbFloats(png.data, png.width * png.height),
    };
  }
  if (raw.length >= 2 && raw[0] === 0xff && raw[1] === 0xd8) {
    const decoded = jpeg.decode(raw, { useTArray: true, maxMemoryUsageInMB: 1024 });
    return {
      width: decoded.width,
      height: decoded.height,
      data: rgbaToRgbFloats(decoded.data, decoded.width * decoded.height),
    };
  }
  throw new Error('unsupported image format (expected PNG or JPEG)');
}

/** Bilinear resize to size x size with half-pixel center sampling. */
export function resizeBilinear(image: RgbImage, size: number): RgbImage {
  if (image.width === size && image.height === size) {
    return { width: size, height: size, data: image.data.slice() };
  }
  const out = new Float32Array(size * size * 3);
  const scaleX = image.width / size;
  const scaleY = image.height / size;
  for (let y = 0; y < size; y++) {
    const srcY = Math.min(Math.max((y + 0.5) * scaleY - 0.5, 0), image.height - 1);
    const y0 = Math.floor(srcY);
    const y1 = Math.min(y0 + 1, image.height - 1);
    const wy = srcY - y0;
    for (let x = 0; x < size; x++) {
      const srcX = Math.min(Math.max((x + 0.5) * scaleX - 0.5, 0), image.width - 1);
      const x0 = Math.floor(srcX);
      const x1 = Math.min(x0 + 1, image.width - 1);
      const wx = srcX - x0;
      for (let c = 0; c < 3; c++) {
        const p00 = image.data[(y0 * image.width + x0) * 3 + c];
        const p01 = image.data[(y0 * image.width + x1) * 3 + c];
        const p10 = image.data[(y1 * image.width + x0) * 3 + c];
        const p11 = image.data[(y1 * image.width + x1) * 3 + c];
        const top = p00 + (p01 - p00) * wx;
        const bottom = p10 + (p11 - p10) * wx;
        out[(y * size + x) * 3 + c] = top + (bottom - top) * wy;
      }
    }
  }
  return { width: size, height: size, data: out };
}

export function normalizeChannels(image: RgbImage): Float32Array {
  const out = new Float32Array(image.data.length);
  for (let i = 0; i < image.data.length; i += 3) {
    out[i] = (image.data[i] - CHANNEL_MEAN[0]) / CHANNEL_STD[0];
    out[i + 1] = (image.data[i + 1] - CHANNEL_MEAN[1]) / CHANNEL_STD[1];
    out[i + 2] = (image.data[i + 2] - CHANNEL_MEAN[2]) / CHANNEL_STD[2];
  }
  return out;
}

/** Decode, resize and normalize one image into NHWC-ready floats. */
export function prepareImage(raw: Buffer, size: number): Float32Array {
  return normalizeChannels(resizeBilinear(decodeImage(raw), size));
}
