/** Shared fixtures for the test suites. */

import {
  type ModelConfig,
  type Weights,
  expectedTensors,
  normalizeConfig,
} from "../src/qvcw.js";
import type { Tensor } from "../src/safetensors.js";

/** Deterministic uniform [0, 1) generator (xorshift32). */
export function rng(seed: number): () => number {
  let s = seed >>> 0 || 1;
  return () => {
    s ^= s << 13;
    s >>>= 0;
    s ^= s >>> 17;
    s ^= s << 5;
    s >>>= 0;
    return s / 0x1_0000_0000;
  };
}

/** Miniature but fully consistent model config (hop 40 = 5 * 2 * 4). */
export const SMALL_CONFIG_RAW: Record<string, unknown> = {
  n_fft: 64,
  hop_length: 40,
  win_length: 64,
  mel_bands: 8,
  content_dim: 12,
  latent_channels: 8,
  hidden_channels: 8,
  embed_dim: 6,
  posterior_layers: 2,
  flow_couplings: 2,
  flow_wn_layers: 2,
  speaker_lstm_hidden: 6,
  decoder_base_channels: 16,
  upsample_scales: [5],
  upsample_kernels: [11],
  resblock_kernels: [3],
  resblock_dilations: [[1, 2]],
  istft_n_fft: 4,
  istft_hop: 2,
  subbands: 4,
  synthesis_taps: 9,
};

export function smallConfig(over: Record<string, unknown> = {}): ModelConfig {
  return normalizeConfig({ ...SMALL_CONFIG_RAW, ...over });
}

/** Random-valued weights that satisfy a config's manifest exactly. */
export function makeEngineWeights(config: ModelConfig, seed: number): Weights {
  const rand = rng(seed);
  const tensors = new Map<string, { shape: number[]; data: Float32Array }>();
  for (const [name, shape] of expectedTensors(config)) {
    const n = shape.reduce((a, b) => a * b, 1);
    const data = new Float32Array(n);
    for (let i = 0; i < n; i++) data[i] = rand() * 2 - 1;
    tensors.set(name, { shape: [...shape], data });
  }
  return { config, tensors };
}

type InverseRule = [RegExp, (m: RegExpExecArray) => string];

const INVERSE_RULES: InverseRule[] = [
  [
    /^(content|posterior)_encoder\.wn\.cond\.(weight|bias)$/,
    (m) => `${m[1] === "content" ? "enc_p" : "enc_q"}.enc.cond_layer.${m[2]}`,
  ],
  [
    /^(content|posterior)_encoder\.wn\.(.+)$/,
    (m) => `${m[1] === "content" ? "enc_p" : "enc_q"}.enc.${m[2]}`,
  ],
  [
    /^(content|posterior)_encoder\.(.+)$/,
    (m) => `${m[1] === "content" ? "enc_p" : "enc_q"}.${m[2]}`,
  ],
  [/^speaker_encoder\.lstm\.(weight|bias)_(ih|hh)$/, (m) => `enc_spk.lstm.${m[1]}_${m[2]}_l0`],
  [/^speaker_encoder\.proj\.(weight|bias)$/, (m) => `enc_spk.fc.${m[1]}`],
  [
    /^flow\.couplings\.(\d+)\.wn\.cond\.(weight|bias)$/,
    (m) => `flow.flows.${2 * Number(m[1])}.enc.cond_layer.${m[2]}`,
  ],
  [
    /^flow\.couplings\.(\d+)\.wn\.(.+)$/,
    (m) => `flow.flows.${2 * Number(m[1])}.enc.${m[2]}`,
  ],
  [/^flow\.couplings\.(\d+)\.(.+)$/, (m) => `flow.flows.${2 * Number(m[1])}.${m[2]}`],
  [/^decoder\.pre\.(weight|bias)$/, (m) => `dec.conv_pre.${m[1]}`],
  [/^decoder\.head\.(weight|bias)$/, (m) => `dec.conv_post.${m[1]}`],
  [/^decoder\.synthesis\.taps$/, () => "dec.synthesis_filter"],
  [/^decoder\.(.+)$/, (m) => `dec.${m[1]}`],
];

/** Engine tensor name -> training-checkpoint tensor name. */
export function toCheckpointName(name: string): string {
  for (const [re, build] of INVERSE_RULES) {
    const m = re.exec(name);
    if (m) return build(m);
  }
  throw new Error(`no checkpoint name for engine tensor ${name}`);
}

/**
 * Engine-named tensors re-expressed as a training checkpoint, with each
 * tensor named in `split` stored as a weight-norm (v, g) pair chosen so
 * folding reproduces the original weight: v = w * s (per-row scale),
 * g = per-row L2 norm of w.
 */
export function asCheckpointTensors(
  weights: Weights,
  split: Set<string>,
  seed: number,
): Map<string, Tensor> {
  const rand = rng(seed);
  const out = new Map<string, Tensor>();
  for (const [name, t] of weights.tensors) {
    const ckptName = toCheckpointName(name);
    if (!split.has(name)) {
      out.set(ckptName, { shape: [...t.shape], data: t.data.slice() });
      continue;
    }
    const outDim = t.shape[0];
    const rowLen = t.data.length / outDim;
    const v = new Float32Array(t.data.length);
    const g = new Float32Array(outDim);
    for (let o = 0; o < outDim; o++) {
      const s = 0.5 + 1.5 * rand();
      let ss = 0;
      for (let i = 0; i < rowLen; i++) {
        const x = t.data[o * rowLen + i];
        ss += x * x;
        v[o * rowLen + i] = x * s;
      }
      g[o] = Math.sqrt(ss);
    }
    out.set(`${ckptName}_v`, { shape: [...t.shape], data: v });
    out.set(`${ckptName}_g`, { shape: [outDim], data: g });
  }
  return out;
}
