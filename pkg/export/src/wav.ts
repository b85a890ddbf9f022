/**
 * Mono 16-bit PCM WAV at 16 kHz, matching the engine's audio contract:
 * reading divides by 32768, writing clips to [-1, 1] and scales by 32767
 * with round-half-to-even. Anything else is rejected, not coerced.
 */

import { readFileSync, writeFileSync } from "node:fs";

export const SAMPLE_RATE = 16000;

export class WavError extends Error {}

export function decodeWav(bytes: Uint8Array): Float64Array {
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  if (bytes.length < 44) throw new WavError("file too short for a WAV header");
  const tag = (off: number) =>
    String.fromCharCode(bytes[off], bytes[off + 1], bytes[off + 2], bytes[off + 3]);
  if (tag(0) !== "RIFF" || tag(8) !== "WAVE") {
    throw new WavError("not a RIFF/WAVE file");
  }

  let fmtSeen = false;
  let channels = 0;
  let rate = 0;
  let bits = 0;
  let pos = 12;
  while (pos + 8 <= bytes.length) {
    const id = tag(pos);
    const size = view.getUint32(pos + 4, true);
    const body = pos + 8;
    if (body + size > bytes.length) {
      throw new WavError(`chunk ${id} runs past end of file`);
    }
    if (id === "fmt ") {
      const format = view.getUint16(body, true);
      if (format !== 1) throw new WavError(`not PCM (format tag ${format})`);
      channels = view.getUint16(body + 2, true);
      rate = view.getUint32(body + 4, true);
      bits = view.getUint16(body + 14, true);
      fmtSeen = true;
    } else if (id === "data") {
      if (!fmtSeen) throw new WavError("data chunk before fmt chunk");
      if (channels !== 1) throw new WavError(`expected mono, got ${channels} channels`);
      if (bits !== 16) throw new WavError(`expected 16-bit PCM, got ${bits}-bit`);
      if (rate !== SAMPLE_RATE) {
        throw new WavError(`expected ${SAMPLE_RATE} Hz, got ${rate} Hz; resample first`);
      }
      const n = Math.floor(size / 2);
      const out = new Float64Array(n);
      for (let i = 0; i < n; i++) {
        out[i] = view.getInt16(body + 2 * i, true) / 32768;
      }
      return out;
    }
    pos = body + size + (size & 1); // chunks are word-aligned
  }
  throw new WavError("no data chunk found");
}

/** Round half to even, matching the engine's quantizer bit for bit. */
function roundHalfEven(x: number): number {
  const f = Math.floor(x);
  const diff = x - f;
  if (diff > 0.5) return f + 1;
  if (diff < 0.5) return f;
  return f % 2 === 0 ? f : f + 1;
}

export function encodeWav(samples: ArrayLike<number>): Uint8Array {
  const n = samples.length;
  const bytes = new Uint8Array(44 + 2 * n);
  const view = new DataView(bytes.buffer);
  const put = (off: number, s: string) => {
    for (let i = 0; i < s.length; i++) bytes[off + i] = s.charCodeAt(i);
  };
  put(0, "RIFF");
  view.setUint32(4, 36 + 2 * n, true);
  put(8, "WAVE");
  put(12, "fmt ");
  view.setUint32(16, 16, true);
  view.setUint16(20, 1, true); // PCM
  view.setUint16(22, 1, true); // mono
  view.setUint32(24, SAMPLE_RATE, true);
  view.setUint32(28, SAMPLE_RATE * 2, true);
  view.setUint16(32, 2, true);
  view.setUint16(34, 16, true);
  put(36, "data");
  view.setUint32(40, 2 * n, true);
  for (let i = 0; i < n; i++) {
    const v = Math.max(-1, Math.min(1, samples[i]));
    view.setInt16(44 + 2 * i, roundHalfEven(v * 32767), true);
  }
  return bytes;
}

export function readWav(path: string): Float64Array {
  return decodeWav(readFileSync(path));
}

export function writeWav(path: string, samples: ArrayLike<number>): void {
  writeFileSync(path, encodeWav(samples));
}
