/**
 * Minimal safetensors reader/writer, float32 tensors only.
 *
 * Layout: u64 LE header length, UTF-8 JSON header mapping tensor name to
 * {dtype, shape, data_offsets: [start, end]} (offsets relative to the
 * byte after the header), then the packed payload. "__metadata__" is
 * carried through untouched.
 */

import { readFileSync, writeFileSync } from "node:fs";

export class SafetensorsError extends Error {}

export interface Tensor {
  shape: number[];
  data: Float32Array;
}

export interface Checkpoint {
  tensors: Map<string, Tensor>;
  metadata: Record<string, string>;
}

export function decodeSafetensors(bytes: Uint8Array): Checkpoint {
  if (bytes.length < 8) throw new SafetensorsError("file too short");
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  const headerLen = Number(view.getBigUint64(0, true));
  if (8 + headerLen > bytes.length) {
    throw new SafetensorsError(`header length ${headerLen} runs past end of file`);
  }
  let header: Record<string, any>;
  try {
    header = JSON.parse(new TextDecoder().decode(bytes.subarray(8, 8 + headerLen)));
  } catch (err) {
    throw new SafetensorsError(`header is not valid JSON: ${err}`);
  }
  const payloadStart = 8 + headerLen;
  const payloadLen = bytes.length - payloadStart;
  const tensors = new Map<string, Tensor>();
  let metadata: Record<string, string> = {};
  for (const [name, entry] of Object.entries(header)) {
    if (name === "__metadata__") {
      metadata = entry;
      continue;
    }
    const { dtype, shape, data_offsets: offs } = entry;
    if (dtype !== "F32") {
      throw new SafetensorsError(`tensor ${name}: unsupported dtype ${dtype}`);
    }
    if (!Array.isArray(offs) || offs.length !== 2 || offs[0] > offs[1] || offs[1] > payloadLen) {
      throw new SafetensorsError(`tensor ${name}: bad data_offsets ${JSON.stringify(offs)}`);
    }
    const count = (shape as number[]).reduce((a, b) => a * b, 1);
    if (offs[1] - offs[0] !== count * 4) {
      throw new SafetensorsError(
        `tensor ${name}: shape ${JSON.stringify(shape)} needs ${count * 4} bytes, ` +
        `offsets give ${offs[1] - offs[0]}`,
      );
    }
    const data = new Float32Array(count);
    for (let i = 0; i < count; i++) {
      data[i] = view.getFloat32(payloadStart + offs[0] + 4 * i, true);
    }
    tensors.set(name, { shape: [...shape], data });
  }
  return { tensors, metadata };
}

export function encodeSafetensors(checkpoint: Checkpoint): Uint8Array {
  const names = [...checkpoint.tensors.keys()].sort();
  const header: Record<string, any> = {};
  if (Object.keys(checkpoint.metadata).length > 0) {
    header.__metadata__ = checkpoint.metadata;
  }
  let offset = 0;
  for (const name of names) {
    const t = checkpoint.tensors.get(name)!;
    const bytes = t.data.length * 4;
    header[name] = { dtype: "F32", shape: t.shape, data_offsets: [offset, offset + bytes] };
    offset += bytes;
  }
  const headerBytes = new TextEncoder().encode(JSON.stringify(header));
  const out = new Uint8Array(8 + headerBytes.length + offset);
  new DataView(out.buffer).setBigUint64(0, BigInt(headerBytes.length), true);
  out.set(headerBytes, 8);
  const view = new DataView(out.buffer);
  let pos = 8 + headerBytes.length;
  for (const name of names) {
    const t = checkpoint.tensors.get(name)!;
    for (let i = 0; i < t.data.length; i++) {
      view.setFloat32(pos, t.data[i], true);
      pos += 4;
    }
  }
  return out;
}

export function readSafetensors(path: string): Checkpoint {
  return decodeSafetensors(readFileSync(path));
}

export function writeSafetensors(path: string, checkpoint: Checkpoint): void {
  writeFileSync(path, encodeSafetensors(checkpoint));
}
