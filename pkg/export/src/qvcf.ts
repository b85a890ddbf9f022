/**
 * QVCF frame container: time-major float32 matrices.
 *
 * Layout (little-endian): magic "QVCF", u32 version 1, u32 frame count T,
 * u32 dim, T*dim float32 payload, u32 CRC32 of the payload. Strict on
 * read: wrong magic/version, short files, trailing bytes, zero dim, and
 * checksum mismatches are all distinct errors.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { crc32 } from "./crc32.js";

export class QvcfError extends Error {}

export interface Frames {
  frames: number;
  dim: number;
  /** row-major (frames x dim) */
  data: Float32Array;
}

const MAGIC = "QVCF";
const VERSION = 1;

export function encodeFrames(frames: number, dim: number, data: Float32Array): Uint8Array {
  if (!Number.isInteger(frames) || frames < 0) {
    throw new QvcfError(`frame count must be a non-negative integer, got ${frames}`);
  }
  if (!Number.isInteger(dim) || dim < 1) {
    throw new QvcfError(`dim must be a positive integer, got ${dim}`);
  }
  if (data.length !== frames * dim) {
    throw new QvcfError(`payload has ${data.length} values, expected ${frames * dim}`);
  }
  const payload = new Uint8Array(data.length * 4);
  const view = new DataView(payload.buffer);
  for (let i = 0; i < data.length; i++) view.setFloat32(4 * i, data[i], true);

  const out = new Uint8Array(16 + payload.length + 4);
  const head = new DataView(out.buffer);
  for (let i = 0; i < 4; i++) out[i] = MAGIC.charCodeAt(i);
  head.setUint32(4, VERSION, true);
  head.setUint32(8, frames, true);
  head.setUint32(12, dim, true);
  out.set(payload, 16);
  head.setUint32(16 + payload.length, crc32(payload), true);
  return out;
}

export function decodeFrames(bytes: Uint8Array): Frames {
  if (bytes.length < 20) throw new QvcfError("file too short for a QVCF container");
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  const magic = String.fromCharCode(bytes[0], bytes[1], bytes[2], bytes[3]);
  if (magic !== MAGIC) throw new QvcfError(`bad magic ${JSON.stringify(magic)}`);
  const version = view.getUint32(4, true);
  if (version !== VERSION) throw new QvcfError(`unsupported version ${version}`);
  const frames = view.getUint32(8, true);
  const dim = view.getUint32(12, true);
  if (dim < 1) throw new QvcfError("dim must be at least 1");
  const expected = 16 + frames * dim * 4 + 4;
  if (bytes.length !== expected) {
    throw new QvcfError(
      `file is ${bytes.length} bytes, expected ${expected} for ${frames}x${dim}`,
    );
  }
  const payload = bytes.subarray(16, 16 + frames * dim * 4);
  const stored = view.getUint32(16 + frames * dim * 4, true);
  const actual = crc32(payload);
  if (stored !== actual) {
    throw new QvcfError(
      `checksum mismatch: stored ${stored.toString(16)}, computed ${actual.toString(16)}`,
    );
  }
  const data = new Float32Array(frames * dim);
  for (let i = 0; i < data.length; i++) data[i] = view.getFloat32(16 + 4 * i, true);
  return { frames, dim, data };
}

export function writeFrames(path: string, frames: number, dim: number, data: Float32Array): void {
  writeFileSync(path, encodeFrames(frames, dim, data));
}

export function readFrames(path: string): Frames {
  return decodeFrames(readFileSync(path));
}
