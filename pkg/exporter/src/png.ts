/**
 * Minimal PNG reader: 8-bit depth, color types gray / RGB / RGBA,
 * non-interlaced. Enough to make "decodable image" a real, testable notion
 * without native codec dependencies.
 */

import { inflateSync } from 'node:zlib';

export class PngError extends Error {}

export interface DecodedImage {
  width: number;
  height: number;
  /** Interleaved RGB, one byte per channel. */
  rgb: Uint8Array;
}

const SIGNATURE = Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);

const CHANNELS: Record<number, number> = { 0: 1, 2: 3, 6: 4 };

export function decodePng(buf: Buffer): DecodedImage {
  if (buf.length < 8 || !buf.subarray(0, 8).equals(SIGNATURE)) {
    throw new PngError('not a PNG (bad signature)');
  }
  let pos = 8;
  let width = 0;
  let height = 0;
  let channels = 0;
  const idat: Buffer[] = [];
  let sawIhdr = false;
  let sawIend = false;

  while (pos < buf.length) {
    if (pos + 8 > buf.length) throw new PngError('truncated chunk header');
    const length = buf.readUInt32BE(pos);
    const type = buf.toString('ascii', pos + 4, pos + 8);
    const dataStart = pos + 8;
    if (dataStart + length + 4 > buf.length) throw new PngError(`truncated ${type} chunk`);
    const data = buf.subarray(dataStart, dataStart + length);
    pos = dataStart + length + 4; // skip CRC

    if (type === 'IHDR') {
      if (length !== 13) throw new PngError('bad IHDR length');
      width = data.readUInt32BE(0);
      height = data.readUInt32BE(4);
      const bitDepth = data[8];
      const colorType = data[9];
      const interlace = data[12];
      if (bitDepth !== 8) throw new PngError(`unsupported bit depth ${bitDepth}`);
      if (!(colorType in CHANNELS)) throw new PngError(`unsupported color type ${colorType}`);
      if (interlace !== 0) throw new PngError('interlaced PNGs unsupported');
      channels = CHANNELS[colorType];
      sawIhdr = true;
    } else if (type === 'IDAT') {
      idat.push(data);
    } else if (type === 'IEND') {
      sawIend = true;
      break;
    }
  }
  if (!sawIhdr || !sawIend || idat.length === 0) throw new PngError('missing required chunks');
  if (width < 1 || height < 1) throw new PngError('empty image');

  let raw: Buffer;
  try {
    raw = inflateSync(Buffer.concat(idat));
  } catch (e) {
    throw new PngError(`IDAT inflate failed: ${(e as Error).message}`);
  }
  const stride = width * channels;
  if (raw.length !== (stride + 1) * height) throw new PngError('pixel data size mismatch');

  const pixels = unfilter(raw, height, stride, channels);
  return { width, height, rgb: toRgb(pixels, width * height, channels) };
}

function unfilter(raw: Buffer, height: number, stride: number, bpp: number): Uint8Array {
  const out = new Uint8Array(height * stride);
  for (let y = 0; y < height; y++) {
    const filter = raw[y * (stride + 1)];
    const row = raw.subarray(y * (stride + 1) + 1, (y + 1) * (stride + 1));
    const o = y * stride;
    const prev = y > 0 ? o - stride : -1;
    for (let x = 0; x < stride; x++) {
      const a = x >= bpp ? out[o + x - bpp] : 0;
      const b = prev >= 0 ? out[prev + x] : 0;
      const c = x >= bpp && prev >= 0 ? out[prev + x - bpp] : 0;
      let v: number;
      switch (filter) {
        case 0:
          v = row[x];
          break;
        case 1:
          v = row[x] + a;
          break;
        case 2:
          v = row[x] + b;
          break;
        case 3:
          v = row[x] + ((a + b) >> 1);
          break;
        case 4:
          v = row[x] + paeth(a, b, c);
          break;
        default:
          throw new PngError(`unknown filter ${filter}`);
      }
      out[o + x] = v & 0xff;
    }
  }
  return out;
}

function paeth(a: number, b: number, c: number): number {
  const p = a + b - c;
  const pa = Math.abs(p - a);
  const pb = Math.abs(p - b);
  const pc = Math.abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

function toRgb(pixels: Uint8Array, count: number, channels: number): Uint8Array {
  const rgb = new Uint8Array(count * 3);
  for (let i = 0; i < count; i++) {
    const s = i * channels;
    if (channels === 1) {
      rgb[i * 3] = rgb[i * 3 + 1] = rgb[i * 3 + 2] = pixels[s];
    } else {
      rgb[i * 3] = pixels[s];
      rgb[i * 3 + 1] = pixels[s + 1];
      rgb[i * 3 + 2] = pixels[s + 2]; // alpha, if present, is dropped
    }
  }
  return rgb;
}
