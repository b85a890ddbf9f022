/**
 * Content-feature extraction: waveform in, (T x 256) float32 frames out,
 * one frame per 320 samples (50 Hz at 16 kHz).
 *
 * This is a deterministic DSP stand-in, not a learned model: each frame
 * is a 64-band log-mel slice of a 640-sample window, expanded to 256
 * dimensions through a fixed seeded projection and squashed with tanh.
 * It preserves everything the engine contract needs (dimension, frame
 * rate, determinism, container format) so the pipeline is exercisable
 * end to end; swap in a real extractor by replacing `extractFeatures`
 * and keeping the framing. The projection seed is part of the output
 * contract: changing it changes every exported file.
 */

import { hannWindow, melFilterbank } from "./dsp.js";
import { rfftMagnitude } from "./fft.js";

export const FEATURE_DIM = 256;
export const FRAME_HOP = 320;

const WINDOW = 640;
const FFT_SIZE = 1024;
const BANDS = 64;
const LOG_FLOOR = 1e-5;
const PROJECTION_SEED = 0x51c6_9e35;

/** Recorded in export manifests so outputs are traceable to the extractor. */
export const EXTRACTOR_ID = "builtin-dsp-projection";
export const EXTRACTOR_REVISION = `v1+seed0x${PROJECTION_SEED.toString(16)}`;

/** xorshift32: tiny, seedable, stable across platforms. */
function* xorshift32(seed: number): Generator<number> {
  let s = seed >>> 0;
  for (;;) {
    s ^= s << 13; s >>>= 0;
    s ^= s >>> 17;
    s ^= s << 5; s >>>= 0;
    yield s / 0x1_0000_0000; // [0, 1)
  }
}

let projection: Float64Array | null = null;

/** Fixed (FEATURE_DIM x BANDS) matrix with roughly unit row norms. */
function projectionMatrix(): Float64Array {
  if (projection) return projection;
  const gen = xorshift32(PROJECTION_SEED);
  const mat = new Float64Array(FEATURE_DIM * BANDS);
  const scale = 1 / Math.sqrt(BANDS);
  for (let i = 0; i < mat.length; i++) {
    // sum of 4 uniforms, centered: cheap near-Gaussian, fully deterministic
    const v =
      gen.next().value + gen.next().value + gen.next().value + gen.next().value - 2;
    mat[i] = v * scale;
  }
  projection = mat;
  return mat;
}

let bank: Float64Array[] | null = null;
let window: Float64Array | null = null;

export function extractFeatures(samples: Float64Array): {
  frames: number;
  dim: number;
  data: Float32Array;
} {
  const frames = Math.floor(samples.length / FRAME_HOP);
  const data = new Float32Array(frames * FEATURE_DIM);
  if (frames === 0) return { frames, dim: FEATURE_DIM, data };

  bank ??= melFilterbank(BANDS, FFT_SIZE, 16000, 0, 8000);
  window ??= hannWindow(WINDOW);
  const mat = projectionMatrix();
  const buf = new Float64Array(FFT_SIZE);
  const mel = new Float64Array(BANDS);

  for (let t = 0; t < frames; t++) {
    buf.fill(0);
    const start = t * FRAME_HOP;
    const avail = Math.min(WINDOW, samples.length - start);
    for (let k = 0; k < avail; k++) buf[k] = samples[start + k] * window[k];
    const mag = rfftMagnitude(buf);
    for (let m = 0; m < BANDS; m++) {
      const filt = bank[m];
      let acc = 0;
      for (let b = 0; b < mag.length; b++) acc += filt[b] * mag[b];
      mel[m] = Math.log(Math.max(acc, LOG_FLOOR));
    }
    for (let d = 0; d < FEATURE_DIM; d++) {
      let acc = 0;
      const row = d * BANDS;
      for (let m = 0; m < BANDS; m++) acc += mat[row + m] * mel[m];
      data[t * FEATURE_DIM + d] = Math.tanh(acc);
    }
  }
  return { frames, dim: FEATURE_DIM, data };
}
