import { readFileSync } from 'node:fs';
import { join } from 'node:path';

import { describe, expect, it } from 'vitest';

import { PngError, decodePng } from '../src/png.js';

const IMAGES = join(__dirname, 'fixtures', 'images');

const load = (name: string) => readFileSync(join(IMAGES, name));

describe('png decoding', () => {
  it('decodes 8-bit grayscale', () => {
    const img = decodePng(load('a_gray.png'));
    expect([img.width, img.height]).toEqual([10, 12]);
    expect(img.rgb.length).toBe(10 * 12 * 3);
    // grayscale replicates into all three channels
    expect(img.rgb[0]).toBe(img.rgb[1]);
    expect(img.rgb[1]).toBe(img.rgb[2]);
  });

  it('decodes RGB and RGBA', () => {
    const rgb = decodePng(load('b_rgb.png'));
    expect([rgb.width, rgb.height]).toEqual([14, 9]);
    const rgba = decodePng(load('c_rgba.png'));
    expect([rgba.width, rgba.height]).toEqual([16, 16]);
    expect(rgba.rgb.length).toBe(16 * 16 * 3);
  });

  it('identical files decode to identical pixels', () => {
    const a = decodePng(load('b_rgb.png'));
    const b = decodePng(load('d_rgb_twin.png'));
    expect(Array.from(a.rgb)).toEqual(Array.from(b.rgb));
  });

  it('rejects garbage', () => {
    expect(() => decodePng(load('y_not_png.png'))).toThrow(PngError);
    expect(() => decodePng(load('z_corrupt.png'))).toThrow(PngError);
  });
});
