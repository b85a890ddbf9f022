import { describe, expect, it } from "vitest";

import { fft, rfftMagnitude } from "../src/fft.js";
import {
  hannWindow,
  linearMagnitude,
  LOG_FLOOR,
  melFilterbank,
  melSpectrogram,
  stftMagnitude,
} from "../src/dsp.js";
import { extractFeatures, FEATURE_DIM, FRAME_HOP } from "../src/features.js";
import { rng } from "./helpers.js";

/** Brute-force DFT, the oracle for the fast transform. */
function naiveDft(re: Float64Array, im: Float64Array): [Float64Array, Float64Array] {
  const n = re.length;
  const outRe = new Float64Array(n);
  const outIm = new Float64Array(n);
  for (let k = 0; k < n; k++) {
    let sr = 0;
    let si = 0;
    for (let j = 0; j < n; j++) {
      const ang = (-2 * Math.PI * k * j) / n;
      const c = Math.cos(ang);
      const s = Math.sin(ang);
      sr += re[j] * c - im[j] * s;
      si += re[j] * s + im[j] * c;
    }
    outRe[k] = sr;
    outIm[k] = si;
  }
  return [outRe, outIm];
}

function randomSignal(n: number, seed: number): Float64Array {
  const rand = rng(seed);
  const x = new Float64Array(n);
  for (let i = 0; i < n; i++) x[i] = rand() * 2 - 1;
  return x;
}

describe("fft", () => {
  const sizes = [1, 2, 4, 8, 64, 256, 3, 5, 6, 12, 100, 240, 320, 641, 1280];

  it.each(sizes)("matches a brute-force DFT for length %d", (n) => {
    const re = randomSignal(n, 100 + n);
    const im = randomSignal(n, 200 + n);
    const [fr, fi] = fft(re.slice(), im.slice());
    const [nr, ni] = naiveDft(re, im);
    let worst = 0;
    for (let k = 0; k < n; k++) {
      worst = Math.max(worst, Math.abs(fr[k] - nr[k]), Math.abs(fi[k] - ni[k]));
    }
    // error scales with sqrt(n) * magnitude; n <= 1280 stays far below this
    expect(worst).toBeLessThan(1e-8 * Math.max(1, n));
  });

  it("rfftMagnitude returns |DFT| on the first n/2+1 bins", () => {
    const n = 320;
    const x = randomSignal(n, 7);
    const mag = rfftMagnitude(x.slice());
    const [nr, ni] = naiveDft(x, new Float64Array(n));
    expect(mag.length).toBe(n / 2 + 1);
    for (let k = 0; k <= n / 2; k++) {
      expect(Math.abs(mag[k] - Math.hypot(nr[k], ni[k]))).toBeLessThan(1e-9 * n);
    }
  });
});

describe("windowing and framing", () => {
  it("hann window is periodic: w[k] + w[k + n/2] == 1", () => {
    const n = 64;
    const w = hannWindow(n);
    expect(w[0]).toBe(0);
    for (let k = 0; k < n / 2; k++) {
      expect(w[k] + w[k + n / 2]).toBeCloseTo(1, 12);
    }
  });

  it("centered framing yields 1 + floor(len/hop) frames of n_fft/2+1 bins", () => {
    const x = randomSignal(16000, 11);
    const frames = stftMagnitude(x);
    expect(frames.length).toBe(1 + Math.floor(16000 / 320));
    expect(frames[0].length).toBe(1280 / 2 + 1);
  });

  it("uncentered framing yields floor((len-n_fft)/hop) + 1 frames", () => {
    const x = randomSignal(16000, 12);
    const frames = stftMagnitude(x, { padding: "none" });
    expect(frames.length).toBe(Math.floor((16000 - 1280) / 320) + 1);
  });
});

describe("mel analysis", () => {
  it("filterbank has the right shape and every band has mass", () => {
    const bank = melFilterbank();
    expect(bank.length).toBe(80);
    expect(bank[0].length).toBe(641);
    for (const row of bank) {
      let sum = 0;
      for (const v of row) {
        expect(v).toBeGreaterThanOrEqual(0);
        sum += v;
      }
      expect(sum).toBeGreaterThan(0);
    }
  });

  it("silence hits the log floor exactly", () => {
    const frames = melSpectrogram(new Float64Array(3200));
    const floor = Math.log(LOG_FLOOR);
    for (const row of frames) {
      for (const v of row) expect(v).toBe(floor);
    }
  });

  it("linear magnitude of silence is exactly zero", () => {
    const frames = linearMagnitude(new Float64Array(3200));
    for (const row of frames) {
      for (const v of row) expect(v).toBe(0);
    }
  });
});

describe("content features", () => {
  it("emits floor(len/hop) frames of dimension 256, bounded by tanh", () => {
    const x = randomSignal(16000, 21);
    const { frames, dim, data } = extractFeatures(x);
    expect(frames).toBe(Math.floor(16000 / FRAME_HOP));
    expect(dim).toBe(FEATURE_DIM);
    expect(data.length).toBe(frames * dim);
    for (const v of data) {
      expect(Math.abs(v)).toBeLessThanOrEqual(1);
    }
  });

  it("is deterministic and input-sensitive", () => {
    const a = randomSignal(8000, 31);
    const b = randomSignal(8000, 32);
    const fa1 = extractFeatures(a).data;
    const fa2 = extractFeatures(a).data;
    const fb = extractFeatures(b).data;
    expect(fa1).toEqual(fa2);
    let differs = false;
    for (let i = 0; i < fa1.length; i++) {
      if (fa1[i] !== fb[i]) {
        differs = true;
        break;
      }
    }
    expect(differs).toBe(true);
  });

  it("handles short and empty input", () => {
    expect(extractFeatures(new Float64Array(0)).frames).toBe(0);
    expect(extractFeatures(new Float64Array(319)).frames).toBe(0);
    expect(extractFeatures(new Float64Array(321)).frames).toBe(1);
  });
});
