/**
 * QVCW weights container: reader, writer, and the strict validation the
 * engine applies on load, mirrored here so the exporter can guarantee
 * that what it writes will be accepted. Normative reference: the
 * engine's docs/formats.md.
 *
 * Layout (little-endian):
 *   bytes 0..3    magic "QVCW"
 *   bytes 4..7    u32 format version (currently 1)
 *   bytes 8..15   u64 header length in bytes
 *   header        UTF-8 JSON {"config": {...}, "tensors": {name: entry}}
 *   payload       raw float32 tensor data, concatenated
 *   trailer       u32 CRC32 of the payload bytes
 *
 * Tensor entries must tile the payload exactly: no gaps, no overlap,
 * nothing dangling after the checksum.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { crc32 } from "./crc32.js";

export class QvcwError extends Error {}

const MAGIC = "QVCW";
const VERSION = 1;

export interface ModelConfig {
  sample_rate: number;
  n_fft: number;
  hop_length: number;
  win_length: number;
  mel_bands: number;
  content_dim: number;
  latent_channels: number;
  hidden_channels: number;
  embed_dim: number;
  wn_kernel: number;
  posterior_layers: number;
  flow_couplings: number;
  flow_wn_layers: number;
  mean_only: boolean;
  speaker_lstm_hidden: number;
  speaker_embedding_normalized: boolean;
  decoder_base_channels: number;
  upsample_scales: number[];
  upsample_kernels: number[];
  resblock_kernels: number[];
  resblock_dilations: number[][];
  istft_n_fft: number;
  istft_hop: number;
  subbands: number;
  synthesis_taps: number;
  lrelu_slope: number;
}

export const DEFAULT_CONFIG: ModelConfig = {
  sample_rate: 16000,
  n_fft: 1280,
  hop_length: 320,
  win_length: 1280,
  mel_bands: 80,
  content_dim: 256,
  latent_channels: 192,
  hidden_channels: 192,
  embed_dim: 256,
  wn_kernel: 5,
  posterior_layers: 16,
  flow_couplings: 4,
  flow_wn_layers: 4,
  mean_only: true,
  speaker_lstm_hidden: 256,
  speaker_embedding_normalized: true,
  decoder_base_channels: 512,
  upsample_scales: [5, 4],
  upsample_kernels: [11, 8],
  resblock_kernels: [3, 7, 11],
  resblock_dilations: [[1, 3, 5], [1, 3, 5], [1, 3, 5]],
  istft_n_fft: 16,
  istft_hop: 4,
  subbands: 4,
  synthesis_taps: 63,
  lrelu_slope: 0.1,
};

const INT_FIELDS: (keyof ModelConfig)[] = [
  "sample_rate", "n_fft", "hop_length", "win_length", "mel_bands",
  "content_dim", "latent_channels", "hidden_channels", "embed_dim",
  "wn_kernel", "posterior_layers", "flow_couplings", "flow_wn_layers",
  "speaker_lstm_hidden", "decoder_base_channels", "istft_n_fft",
  "istft_hop", "subbands", "synthesis_taps",
];

/**
 * Fill in defaults, reject unknown fields, and enforce the same structural
 * invariants the engine enforces, so a config that passes here will load.
 */
export function normalizeConfig(raw: Record<string, unknown>): ModelConfig {
  if (raw === null || typeof raw !== "object" || Array.isArray(raw)) {
    throw new QvcwError("config must be a JSON object");
  }
  const known = new Set(Object.keys(DEFAULT_CONFIG));
  const extra = Object.keys(raw).filter((k) => !known.has(k));
  if (extra.length > 0) {
    throw new QvcwError(`unknown config fields: ${extra.sort().join(", ")}`);
  }
  const cfg: ModelConfig = {
    ...DEFAULT_CONFIG,
    ...raw,
  } as ModelConfig;
  cfg.upsample_scales = [...cfg.upsample_scales];
  cfg.upsample_kernels = [...cfg.upsample_kernels];
  cfg.resblock_kernels = [...cfg.resblock_kernels];
  cfg.resblock_dilations = cfg.resblock_dilations.map((d) => [...d]);

  for (const name of INT_FIELDS) {
    const v = cfg[name];
    if (typeof v !== "number" || !Number.isInteger(v) || v < 1) {
      throw new QvcwError(`config field ${name} must be a positive integer, got ${v}`);
    }
  }
  if (cfg.upsample_scales.length !== cfg.upsample_kernels.length) {
    throw new QvcwError("upsample_scales and upsample_kernels lengths differ");
  }
  if (cfg.resblock_kernels.length !== cfg.resblock_dilations.length) {
    throw new QvcwError("resblock_kernels and resblock_dilations lengths differ");
  }
  if (cfg.latent_channels % 2 !== 0) {
    throw new QvcwError("latent_channels must be even");
  }
  if (cfg.n_fft % 2 !== 0 || cfg.istft_n_fft % 2 !== 0) {
    throw new QvcwError("FFT sizes must be even");
  }
  if (cfg.synthesis_taps % 2 === 0) {
    throw new QvcwError("synthesis_taps must be odd");
  }
  for (let i = 0; i < cfg.upsample_scales.length; i++) {
    const s = cfg.upsample_scales[i];
    const k = cfg.upsample_kernels[i];
    if (s < 1 || k < s || (k - s) % 2 !== 0) {
      throw new QvcwError(`upsample stage ${i}: kernel ${k} incompatible with scale ${s}`);
    }
  }
  const perFrame = cfg.upsample_scales.reduce((a, b) => a * b, cfg.istft_hop * cfg.subbands);
  if (perFrame !== cfg.hop_length) {
    throw new QvcwError(
      `upsampling chain produces ${perFrame} samples per frame but hop_length ` +
      `is ${cfg.hop_length}; upsample_scales * istft_hop * subbands must equal hop_length`,
    );
  }
  if (cfg.decoder_base_channels % (1 << cfg.upsample_scales.length) !== 0) {
    throw new QvcwError("decoder_base_channels must be divisible by 2**stages");
  }
  return cfg;
}

/** Every tensor name a model built from the config reads, with its shape. */
export function expectedTensors(cfg: ModelConfig): Map<string, number[]> {
  const h = cfg.hidden_channels;
  const latent = cfg.latent_channels;
  const gin = cfg.embed_dim;
  const out = new Map<string, number[]>();

  const wn = (prefix: string, layers: number, kernel: number, cond: boolean) => {
    for (let i = 0; i < layers; i++) {
      out.set(`${prefix}.in_layers.${i}.weight`, [2 * h, h, kernel]);
      out.set(`${prefix}.in_layers.${i}.bias`, [2 * h]);
      const rs = i < layers - 1 ? 2 * h : h;
      out.set(`${prefix}.res_skip_layers.${i}.weight`, [rs, h, 1]);
      out.set(`${prefix}.res_skip_layers.${i}.bias`, [rs]);
    }
    if (cond) {
      out.set(`${prefix}.cond.weight`, [2 * h * layers, gin, 1]);
      out.set(`${prefix}.cond.bias`, [2 * h * layers]);
    }
  };

  const encoder = (prefix: string, inDim: number, cond: boolean) => {
    out.set(`${prefix}.pre.weight`, [h, inDim, 1]);
    out.set(`${prefix}.pre.bias`, [h]);
    wn(`${prefix}.wn`, cfg.posterior_layers, cfg.wn_kernel, cond);
    out.set(`${prefix}.proj.weight`, [2 * latent, h, 1]);
    out.set(`${prefix}.proj.bias`, [2 * latent]);
  };

  const specBins = Math.floor(cfg.n_fft / 2) + 1;
  encoder("content_encoder", cfg.content_dim, false);
  encoder("posterior_encoder", specBins, true);

  const lstmH = cfg.speaker_lstm_hidden;
  out.set("speaker_encoder.lstm.weight_ih", [4 * lstmH, cfg.mel_bands]);
  out.set("speaker_encoder.lstm.weight_hh", [4 * lstmH, lstmH]);
  out.set("speaker_encoder.lstm.bias_ih", [4 * lstmH]);
  out.set("speaker_encoder.lstm.bias_hh", [4 * lstmH]);
  out.set("speaker_encoder.proj.weight", [gin, lstmH]);
  out.set("speaker_encoder.proj.bias", [gin]);

  const half = latent / 2;
  const postOut = cfg.mean_only ? half : latent;
  for (let i = 0; i < cfg.flow_couplings; i++) {
    const p = `flow.couplings.${i}`;
    out.set(`${p}.pre.weight`, [h, half, 1]);
    out.set(`${p}.pre.bias`, [h]);
    wn(`${p}.wn`, cfg.flow_wn_layers, cfg.wn_kernel, true);
    out.set(`${p}.post.weight`, [postOut, h, 1]);
    out.set(`${p}.post.bias`, [postOut]);
  }

  const base = cfg.decoder_base_channels;
  out.set("decoder.pre.weight", [base, latent, 7]);
  out.set("decoder.pre.bias", [base]);
  out.set("decoder.cond.weight", [base, gin, 1]);
  out.set("decoder.cond.bias", [base]);
  const nKernels = cfg.resblock_kernels.length;
  for (let i = 0; i < cfg.upsample_kernels.length; i++) {
    const cIn = base >> i;
    const cOut = base >> (i + 1);
    out.set(`decoder.ups.${i}.weight`, [cIn, cOut, cfg.upsample_kernels[i]]);
    out.set(`decoder.ups.${i}.bias`, [cOut]);
    for (let j = 0; j < nKernels; j++) {
      const p = `decoder.resblocks.${i * nKernels + j}`;
      const kRes = cfg.resblock_kernels[j];
      for (let d = 0; d < cfg.resblock_dilations[j].length; d++) {
        out.set(`${p}.convs1.${d}.weight`, [cOut, cOut, kRes]);
        out.set(`${p}.convs1.${d}.bias`, [cOut]);
        out.set(`${p}.convs2.${d}.weight`, [cOut, cOut, kRes]);
        out.set(`${p}.convs2.${d}.bias`, [cOut]);
      }
    }
  }
  const last = base >> cfg.upsample_scales.length;
  const headChannels = cfg.subbands * (cfg.istft_n_fft + 2);
  out.set("decoder.head.weight", [headChannels, last, 7]);
  out.set("decoder.head.bias", [headChannels]);
  out.set("decoder.synthesis.taps", [cfg.subbands, cfg.synthesis_taps]);
  return out;
}

export interface Weights {
  config: ModelConfig;
  tensors: Map<string, { shape: number[]; data: Float32Array }>;
}

/** Missing/extra/mis-shaped tensors relative to the config's manifest. */
export function validateManifest(weights: Weights): string[] {
  const problems: string[] = [];
  const expected = expectedTensors(weights.config);
  for (const [name, shape] of expected) {
    const got = weights.tensors.get(name);
    if (!got) {
      problems.push(`missing tensor ${name}`);
    } else if (got.shape.length !== shape.length || got.shape.some((v, i) => v !== shape[i])) {
      problems.push(
        `tensor ${name}: shape [${got.shape}] does not match expected [${shape}]`,
      );
    }
  }
  for (const name of weights.tensors.keys()) {
    if (!expected.has(name)) problems.push(`unexpected tensor ${name}`);
  }
  return problems;
}

/** JSON with recursively sorted object keys and no whitespace. */
function stableStringify(value: unknown): string {
  if (Array.isArray(value)) return `[${value.map(stableStringify).join(",")}]`;
  if (value && typeof value === "object") {
    const parts = Object.entries(value as Record<string, unknown>)
      .sort(([a], [b]) => (a < b ? -1 : 1))
      .map(([k, v]) => `${JSON.stringify(k)}:${stableStringify(v)}`);
    return `{${parts.join(",")}}`;
  }
  return JSON.stringify(value);
}

export function encodeWeights(weights: Weights): Uint8Array {
  const problems = validateManifest(weights);
  if (problems.length > 0) {
    throw new QvcwError(`refusing to write an invalid container:\n  ${problems.join("\n  ")}`);
  }
  const names = [...weights.tensors.keys()].sort();
  const entries: Record<string, { dtype: string; shape: number[]; offset: number; len: number }> = {};
  let offset = 0;
  for (const name of names) {
    const t = weights.tensors.get(name)!;
    entries[name] = { dtype: "f32", shape: t.shape, offset, len: t.data.length };
    offset += t.data.length * 4;
  }
  const headerBytes = new TextEncoder().encode(
    stableStringify({ config: weights.config, tensors: entries }),
  );

  const payload = new Uint8Array(offset);
  const pview = new DataView(payload.buffer);
  let pos = 0;
  for (const name of names) {
    const t = weights.tensors.get(name)!;
    for (let i = 0; i < t.data.length; i++) {
      pview.setFloat32(pos, t.data[i], true);
      pos += 4;
    }
  }

  const out = new Uint8Array(16 + headerBytes.length + payload.length + 4);
  const view = new DataView(out.buffer);
  for (let i = 0; i < 4; i++) out[i] = MAGIC.charCodeAt(i);
  view.setUint32(4, VERSION, true);
  view.setBigUint64(8, BigInt(headerBytes.length), true);
  out.set(headerBytes, 16);
  out.set(payload, 16 + headerBytes.length);
  view.setUint32(16 + headerBytes.length + payload.length, crc32(payload), true);
  return out;
}

export function decodeWeights(bytes: Uint8Array): Weights {
  if (bytes.length < 16) {
    throw new QvcwError(`container is ${bytes.length} bytes; the fixed header needs 16`);
  }
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  const magic = String.fromCharCode(bytes[0], bytes[1], bytes[2], bytes[3]);
  if (magic !== MAGIC) throw new QvcwError(`not a QVCW container (magic ${JSON.stringify(magic)})`);
  const version = view.getUint32(4, true);
  if (version !== VERSION) {
    throw new QvcwError(`container version ${version}; this reader handles version ${VERSION}`);
  }
  const headerLen = Number(view.getBigUint64(8, true));
  if (16 + headerLen > bytes.length) {
    throw new QvcwError(`declared header length ${headerLen} runs past end of file`);
  }
  let header: { config?: unknown; tensors?: unknown };
  try {
    header = JSON.parse(new TextDecoder("utf-8", { fatal: true }).decode(
      bytes.subarray(16, 16 + headerLen),
    ));
  } catch (err) {
    throw new QvcwError(`header is not valid UTF-8 JSON: ${err}`);
  }
  if (
    header === null || typeof header !== "object" || Array.isArray(header) ||
    !("config" in header) || !("tensors" in header)
  ) {
    throw new QvcwError('header must be an object with "config" and "tensors"');
  }
  const table = header.tensors as Record<string, any>;
  if (table === null || typeof table !== "object" || Array.isArray(table)) {
    throw new QvcwError("tensor table must be an object");
  }

  interface Entry { off: number; nbytes: number; name: string; shape: number[] }
  const entries: Entry[] = [];
  for (const [name, entry] of Object.entries(table)) {
    if (entry === null || typeof entry !== "object") {
      throw new QvcwError(`tensor ${name}: entry must be an object`);
    }
    const { dtype, shape, offset, len } = entry;
    if (dtype !== "f32") throw new QvcwError(`tensor ${name}: unsupported dtype ${dtype}`);
    if (
      !Array.isArray(shape) || !shape.every((d) => Number.isInteger(d) && d >= 0) ||
      !Number.isInteger(offset) || !Number.isInteger(len) || offset < 0 || len < 0
    ) {
      throw new QvcwError(`tensor ${name}: malformed shape/offset/len`);
    }
    const count = shape.reduce((a: number, b: number) => a * b, 1);
    if (count !== len) {
      throw new QvcwError(`tensor ${name}: shape [${shape}] has ${count} elements, len says ${len}`);
    }
    if (offset % 4 !== 0) {
      throw new QvcwError(`tensor ${name}: offset ${offset} not 4-byte aligned`);
    }
    entries.push({ off: offset, nbytes: len * 4, name, shape: [...shape] });
  }

  entries.sort((a, b) => a.off - b.off);
  let pos = 0;
  for (const e of entries) {
    if (e.off !== pos) {
      throw new QvcwError(
        `tensor table does not tile the payload: tensor ${e.name} at offset ${e.off}, expected ${pos}`,
      );
    }
    pos += e.nbytes;
  }
  const payloadLen = pos;
  const wantTotal = 16 + headerLen + payloadLen + 4;
  if (bytes.length < wantTotal) {
    throw new QvcwError(
      `file is ${bytes.length} bytes but header + payload + checksum need ${wantTotal}`,
    );
  }
  if (bytes.length > wantTotal) {
    throw new QvcwError(`${bytes.length - wantTotal} trailing bytes after checksum`);
  }
  const payload = bytes.subarray(16 + headerLen, 16 + headerLen + payloadLen);
  const storedCrc = view.getUint32(wantTotal - 4, true);
  const actualCrc = crc32(payload);
  if (storedCrc !== actualCrc) {
    throw new QvcwError(
      `payload checksum 0x${actualCrc.toString(16).padStart(8, "0")} != stored ` +
      `0x${storedCrc.toString(16).padStart(8, "0")}`,
    );
  }

  const config = normalizeConfig(header.config as Record<string, unknown>);
  const tensors = new Map<string, { shape: number[]; data: Float32Array }>();
  for (const e of entries) {
    const data = new Float32Array(e.nbytes / 4);
    const base = 16 + headerLen + e.off;
    for (let i = 0; i < data.length; i++) data[i] = view.getFloat32(base + 4 * i, true);
    tensors.set(e.name, { shape: e.shape, data });
  }
  return { config, tensors };
}

export function readWeights(path: string): Weights {
  return decodeWeights(readFileSync(path));
}

export function writeWeights(path: string, weights: Weights): void {
  writeFileSync(path, encodeWeights(weights));
}
