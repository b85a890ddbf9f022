/**
 * Convention cross-validation: recompute mel / linear spectrograms here
 * and compare them against frames the engine produced for the same
 * audio. Agreement within tolerance proves both sides share the same
 * STFT conventions (window, centering, padding, filterbank, log floor).
 *
 * On disagreement the checker probes alternative framing conventions to
 * name the likely cause instead of just printing a number.
 */

import type { Frames } from "./qvcf.js";
import {
  type PaddingMode,
  linearMagnitude,
  melSpectrogram,
} from "./dsp.js";

export const CROSS_CHECK_TOLERANCE = 1e-4;

export type SpectrogramKind = "mel" | "linear";

export interface CrossCheckReport {
  kind: SpectrogramKind;
  tolerance: number;
  engineFrames: number;
  engineDim: number;
  localFrames: number;
  localDim: number;
  /** null when the shapes do not even agree */
  maxAbsDeviation: number | null;
  pass: boolean;
  diagnosis: string | null;
}

function computeLocal(wave: Float64Array, kind: SpectrogramKind, padding: PaddingMode): Float64Array[] {
  return kind === "mel" ? melSpectrogram(wave, padding) : linearMagnitude(wave, padding);
}

/**
 * Max abs deviation between local frames (quantized to f32, since the
 * engine ships f32 payloads) and engine frames; null on shape mismatch.
 */
function deviation(local: Float64Array[], engine: Frames): number | null {
  const dim = local.length > 0 ? local[0].length : engine.dim;
  if (local.length !== engine.frames || dim !== engine.dim) return null;
  let worst = 0;
  for (let t = 0; t < local.length; t++) {
    const row = local[t];
    for (let d = 0; d < dim; d++) {
      const dev = Math.abs(Math.fround(row[d]) - engine.data[t * dim + d]);
      if (dev > worst) worst = dev;
    }
  }
  return worst;
}

const PADDING_NAMES: Record<PaddingMode, string> = {
  reflect: "reflect-centered framing",
  constant: "zero-padded centered framing",
  none: "uncentered (left-aligned) framing",
};

export function crossCheck(
  wave: Float64Array,
  engine: Frames,
  kind: SpectrogramKind,
  tolerance: number = CROSS_CHECK_TOLERANCE,
): CrossCheckReport {
  const local = computeLocal(wave, kind, "reflect");
  const localDim = local.length > 0 ? local[0].length : 0;
  const dev = deviation(local, engine);
  const pass = dev !== null && dev < tolerance;

  let diagnosis: string | null = null;
  if (!pass) {
    let bestMode: PaddingMode | null = null;
    let bestDev = Infinity;
    for (const mode of ["constant", "none"] as PaddingMode[]) {
      const alt = deviation(computeLocal(wave, kind, mode), engine);
      if (alt !== null && alt < bestDev) {
        bestMode = mode;
        bestDev = alt;
      }
    }
    if (bestMode !== null && bestDev < tolerance) {
      diagnosis =
        `center-padding mismatch: engine frames match ${PADDING_NAMES[bestMode]} ` +
        `("${bestMode}", deviation ${bestDev.toExponential(2)}) instead of the expected ` +
        `${PADDING_NAMES.reflect}`;
    } else if (dev === null) {
      diagnosis =
        `shape mismatch: engine emitted ${engine.frames}x${engine.dim}, ` +
        `local analysis gives ${local.length}x${localDim}`;
    } else {
      diagnosis =
        `conventions differ beyond tolerance (max abs deviation ` +
        `${dev.toExponential(2)}) and no alternative framing explains it`;
    }
  }

  return {
    kind,
    tolerance,
    engineFrames: engine.frames,
    engineDim: engine.dim,
    localFrames: local.length,
    localDim,
    maxAbsDeviation: dev,
    pass,
    diagnosis,
  };
}
