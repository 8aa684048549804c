/**
 * Embedding backends behind a checkpoint-id string.
 *
 * Only the deterministic stub backend ships here: `stub:<dim>` (e.g.
 * "stub:64") embeds images and text reproducibly with no model weights,
 * which keeps the full export pipeline testable offline. Real checkpoints
 * plug in through the same Encoder interface without touching callers.
 */

import { DecodedImage } from './png.js';

export class EncoderError extends Error {}

export interface Encoder {
  readonly id: string;
  readonly dim: number;
  encodeImage(image: DecodedImage): Float64Array;
  encodeText(text: string): Float64Array;
}

export function createEncoder(checkpointId: string): Encoder {
  const match = /^stub:(\d+)$/.exec(checkpointId);
  if (match) {
    const dim = Number(match[1]);
    if (dim < 1 || dim > 65536) throw new EncoderError(`stub dimension out of range: ${dim}`);
    return new StubEncoder(checkpointId, dim);
  }
  throw new EncoderError(
    `no backend bundled for checkpoint '${checkpointId}'; ` +
      `this build ships only the deterministic stub backend ("stub:<dim>")`,
  );
}

// FNV-1a, then xorshift32 to whiten consecutive outputs.
function fnv1a(text: string, seed = 0x811c9dc5): number {
  let h = seed >>> 0;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  return h >>> 0;
}

class Xorshift {
  private s: number;
  constructor(seed: number) {
    this.s = seed >>> 0 || 0x9e3779b9;
  }
  next(): number {
    let x = this.s;
    x ^= x << 13;
    x ^= x >>> 17;
    x ^= x << 5;
    this.s = x >>> 0;
    return this.s / 0x100000000; // [0, 1)
  }
}

const POOL = 8; // images are average-pooled to an 8x8 RGB grid before projection

class StubEncoder implements Encoder {
  readonly id: string;
  readonly dim: number;
  private projection: Float64Array; // dim x (POOL*POOL*3), seeded by the id

  constructor(id: string, dim: number) {
    this.id = id;
    this.dim = dim;
    const rng = new Xorshift(fnv1a(id));
    this.projection = new Float64Array(dim * POOL * POOL * 3);
    for (let i = 0; i < this.projection.length; i++) this.projection[i] = rng.next() * 2 - 1;
  }

  encodeImage(image: DecodedImage): Float64Array {
    const grid = new Float64Array(POOL * POOL * 3);
    const counts = new Float64Array(POOL * POOL);
    for (let y = 0; y < image.height; y++) {
      const gy = Math.min(POOL - 1, Math.floor((y * POOL) / image.height));
      for (let x = 0; x < image.width; x++) {
        const gx = Math.min(POOL - 1, Math.floor((x * POOL) / image.width));
        const cell = gy * POOL + gx;
        const s = (y * image.width + x) * 3;
        grid[cell * 3] += image.rgb[s] / 255;
        grid[cell * 3 + 1] += image.rgb[s + 1] / 255;
        grid[cell * 3 + 2] += image.rgb[s + 2] / 255;
        counts[cell] += 1;
      }
    }
    for (let cell = 0; cell < counts.length; cell++) {
      if (counts[cell] > 0) {
        grid[cell * 3] /= counts[cell];
        grid[cell * 3 + 1] /= counts[cell];
        grid[cell * 3 + 2] /= counts[cell];
      }
    }
    const out = new Float64Array(this.dim);
    for (let d = 0; d < this.dim; d++) {
      let acc = 0;
      const base = d * grid.length;
      for (let i = 0; i < grid.length; i++) acc += this.projection[base + i] * grid[i];
      out[d] = acc;
    }
    return out;
  }

  encodeText(text: string): Float64Array {
    const out = new Float64Array(this.dim);
    const words = text.toLowerCase().split(/\s+/).filter(Boolean);
    for (let i = 0; i < words.length; i++) {
      // position-salted word hash: reordered prompts embed differently
      const rng = new Xorshift(fnv1a(`${i}#${words[i]}`, fnv1a(this.id)));
      for (let d = 0; d < this.dim; d++) out[d] += rng.next() * 2 - 1;
    }
    return out;
  }
}

export function l2Normalize(v: Float64Array): Float64Array {
  let norm = 0;
  for (let i = 0; i < v.length; i++) norm += v[i] * v[i];
  norm = Math.sqrt(norm);
  if (norm === 0) throw new EncoderError('cannot normalize a zero embedding');
  const out = new Float64Array(v.length);
  for (let i = 0; i < v.length; i++) out[i] = v[i] / norm;
  return out;
}
