/**
 * Spectrogram math mirroring the engine's conventions exactly (see the
 * engine's docs/dsp.md): periodic Hann window, reflect center padding by
 * n_fft/2, T = 1 + floor(len/hop) frames, unnormalized forward FFT,
 * Slaney-scale mel filters over magnitude (not power) spectra with a
 * 1e-5 log floor. Any deviation here shows up in cross-check, which is
 * the point of having two independent implementations.
 */

import { rfftMagnitude } from "./fft.js";

export const N_FFT = 1280;
export const HOP_LENGTH = 320;
export const MEL_BANDS = 80;
export const LOG_FLOOR = 1e-5;
export const FMIN = 0;
export const FMAX = 8000;

export type PaddingMode = "reflect" | "constant" | "none";

export function hannWindow(n: number): Float64Array {
  const w = new Float64Array(n);
  for (let k = 0; k < n; k++) {
    w[k] = 0.5 - 0.5 * Math.cos((2 * Math.PI * k) / n);
  }
  return w;
}

function padCenter(x: Float64Array, pad: number, mode: PaddingMode): Float64Array {
  if (mode === "none") return x;
  const out = new Float64Array(x.length + 2 * pad);
  out.set(x, pad);
  if (mode === "reflect") {
    if (x.length <= pad) throw new Error(`input length ${x.length} too short to reflect ${pad}`);
    for (let i = 0; i < pad; i++) {
      out[pad - 1 - i] = x[i + 1];
      out[pad + x.length + i] = x[x.length - 2 - i];
    }
  }
  // constant mode leaves the zeros in place
  return out;
}

export interface StftOptions {
  nFft?: number;
  hopLength?: number;
  padding?: PaddingMode;
}

/** Magnitude spectrogram, time-major (T x bins). */
export function stftMagnitude(x: Float64Array, opts: StftOptions = {}): Float64Array[] {
  const nFft = opts.nFft ?? N_FFT;
  const hop = opts.hopLength ?? HOP_LENGTH;
  const padding = opts.padding ?? "reflect";
  if (x.length <= Math.floor(nFft / 2)) {
    throw new Error(`need more than ${Math.floor(nFft / 2)} samples, got ${x.length}`);
  }
  const window = hannWindow(nFft);
  const padded = padCenter(x, Math.floor(nFft / 2), padding);
  const frames =
    padding === "none"
      ? Math.floor((x.length - nFft) / hop) + 1
      : 1 + Math.floor(x.length / hop);
  const out: Float64Array[] = [];
  const buf = new Float64Array(nFft);
  for (let t = 0; t < frames; t++) {
    const start = t * hop;
    for (let k = 0; k < nFft; k++) buf[k] = padded[start + k] * window[k];
    out.push(rfftMagnitude(buf));
  }
  return out;
}

function hzToMel(hz: number): number {
  const fSp = 200 / 3;
  const minLogHz = 1000;
  const minLogMel = minLogHz / fSp;
  const logStep = Math.log(6.4) / 27;
  return hz < minLogHz ? hz / fSp : minLogMel + Math.log(hz / minLogHz) / logStep;
}

function melToHz(mel: number): number {
  const fSp = 200 / 3;
  const minLogHz = 1000;
  const minLogMel = minLogHz / fSp;
  const logStep = Math.log(6.4) / 27;
  return mel < minLogMel ? mel * fSp : minLogHz * Math.exp(logStep * (mel - minLogMel));
}

/** Slaney-normalized triangular filterbank, (nMels x bins). */
export function melFilterbank(
  nMels = MEL_BANDS,
  nFft = N_FFT,
  sampleRate = 16000,
  fmin = FMIN,
  fmax = FMAX,
): Float64Array[] {
  const bins = Math.floor(nFft / 2) + 1;
  const melPoints = new Float64Array(nMels + 2);
  const lo = hzToMel(fmin);
  const hi = hzToMel(fmax);
  for (let i = 0; i < nMels + 2; i++) {
    melPoints[i] = melToHz(lo + ((hi - lo) * i) / (nMels + 1));
  }
  const freqs = new Float64Array(bins);
  for (let b = 0; b < bins; b++) freqs[b] = (b * sampleRate) / nFft;
  const bank: Float64Array[] = [];
  for (let m = 0; m < nMels; m++) {
    const left = melPoints[m];
    const center = melPoints[m + 1];
    const right = melPoints[m + 2];
    const row = new Float64Array(bins);
    const norm = 2 / (right - left);
    for (let b = 0; b < bins; b++) {
      const up = (freqs[b] - left) / (center - left);
      const down = (right - freqs[b]) / (right - center);
      row[b] = Math.max(0, Math.min(up, down)) * norm;
    }
    bank.push(row);
  }
  return bank;
}

let defaultBank: Float64Array[] | null = null;

/** Log-mel frames, (T x 80), matching `quickvc dsp mel`. */
export function melSpectrogram(x: Float64Array, padding: PaddingMode = "reflect"): Float64Array[] {
  if (defaultBank === null) defaultBank = melFilterbank();
  const spec = stftMagnitude(x, { padding });
  return spec.map((frame) => {
    const row = new Float64Array(MEL_BANDS);
    for (let m = 0; m < MEL_BANDS; m++) {
      const filt = defaultBank![m];
      let acc = 0;
      for (let b = 0; b < frame.length; b++) acc += filt[b] * frame[b];
      row[m] = Math.log(Math.max(acc, LOG_FLOOR));
    }
    return row;
  });
}

/** Linear magnitude frames, (T x 641), matching `quickvc dsp linear`. */
export function linearMagnitude(x: Float64Array, padding: PaddingMode = "reflect"): Float64Array[] {
  return stftMagnitude(x, { padding });
}
