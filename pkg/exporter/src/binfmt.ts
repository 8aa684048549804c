/**
 * Binary file formats shared with the cleanselect toolkit.
 *
 * EMB1: "EMB1", u64 rows, u64 cols, rows*cols f32 row-major, little-endian.
 * LAB1: "LAB1", u64 count, count u32 labels, little-endian.
 */

import { readFileSync, renameSync, writeFileSync } from 'node:fs';
import { dirname, join } from 'node:path';

export class FormatError extends Error {}

const EMB1_MAGIC = 'EMB1';
const LAB1_MAGIC = 'LAB1';

export function encodeEmb1(rows: number, cols: number, data: Float32Array): Buffer {
  if (rows < 1 || cols < 1) throw new FormatError(`matrix must be at least 1x1, got ${rows}x${cols}`);
  if (data.length !== rows * cols) {
    throw new FormatError(`data length ${data.length} does not match ${rows}x${cols}`);
  }
  for (let i = 0; i < data.length; i++) {
    if (!Number.isFinite(data[i])) throw new FormatError(`non-finite value at index ${i}`);
  }
  const buf = Buffer.alloc(4 + 16 + data.length * 4);
  buf.write(EMB1_MAGIC, 0, 'ascii');
  buf.writeBigUInt64LE(BigInt(rows), 4);
  buf.writeBigUInt64LE(BigInt(cols), 12);
  for (let i = 0; i < data.length; i++) buf.writeFloatLE(data[i], 20 + i * 4);
  return buf;
}

export function decodeEmb1(buf: Buffer): { rows: number; cols: number; data: Float32Array } {
  if (buf.length < 20 || buf.toString('ascii', 0, 4) !== EMB1_MAGIC) {
    throw new FormatError('bad EMB1 magic');
  }
  const rows = Number(buf.readBigUInt64LE(4));
  const cols = Number(buf.readBigUInt64LE(12));
  if (buf.length !== 20 + rows * cols * 4) throw new FormatError('EMB1 payload size mismatch');
  const data = new Float32Array(rows * cols);
  for (let i = 0; i < data.length; i++) data[i] = buf.readFloatLE(20 + i * 4);
  return { rows, cols, data };
}

export function encodeLab1(labels: ArrayLike<number>): Buffer {
  const buf = Buffer.alloc(4 + 8 + labels.length * 4);
  buf.write(LAB1_MAGIC, 0, 'ascii');
  buf.writeBigUInt64LE(BigInt(labels.length), 4);
  for (let i = 0; i < labels.length; i++) {
    const v = labels[i];
    if (!Number.isInteger(v) || v < 0 || v > 0xffffffff) {
      throw new FormatError(`label ${v} at index ${i} is not a u32`);
    }
    buf.writeUInt32LE(v, 12 + i * 4);
  }
  return buf;
}

export function decodeLab1(buf: Buffer): number[] {
  if (buf.length < 12 || buf.toString('ascii', 0, 4) !== LAB1_MAGIC) {
    throw new FormatError('bad LAB1 magic');
  }
  const count = Number(buf.readBigUInt64LE(4));
  if (buf.length !== 12 + count * 4) throw new FormatError('LAB1 payload size mismatch');
  const out = new Array<number>(count);
  for (let i = 0; i < count; i++) out[i] = buf.readUInt32LE(12 + i * 4);
  return out;
}

/** Write atomically: temp file in the same directory, then rename. */
export function writeFileAtomic(path: string, data: Buffer | string): void {
  const tmp = join(dirname(path), `.${process.pid}.${Date.now()}.tmp`);
  writeFileSync(tmp, data);
  renameSync(tmp, path);
}

export function readEmb1File(path: string) {
  return decodeEmb1(readFileSync(path));
}
