/**
 * Checkpoint-to-container conversion: folds weight normalization and
 * renames tensors from the training-framework layout to the engine's
 * QVCW layout.
 *
 * The name map below is the published contract for checkpoint authors.
 * Conversion is all-or-nothing: any tensor that cannot be mapped, and
 * any mapped set that fails the engine's manifest, aborts with a list
 * of the offending names.
 */

import type { Checkpoint, Tensor } from "./safetensors.js";
import {
  type ModelConfig,
  type Weights,
  normalizeConfig,
  validateManifest,
} from "./qvcw.js";

export class ExportError extends Error {}

/**
 * Fold weight normalization: every `NAME.weight_v` / `NAME.weight_g`
 * pair is replaced by `NAME.weight` where
 *
 *   weight[o, ...] = g[o] * v[o, ...] / l2norm(v[o, ...])
 *
 * with the norm taken per output row (axis 0) over all remaining axes.
 * A `weight_v` without its `weight_g` (or vice versa) is an error, as
 * is a folded name colliding with a tensor already in the checkpoint.
 */
export function foldWeightNorm(tensors: Map<string, Tensor>): Map<string, Tensor> {
  const out = new Map<string, Tensor>();
  const consumed = new Set<string>();

  for (const [name, v] of tensors) {
    if (!name.endsWith(".weight_v")) continue;
    const stem = name.slice(0, -".weight_v".length);
    const gName = `${stem}.weight_g`;
    const wName = `${stem}.weight`;
    const g = tensors.get(gName);
    if (!g) {
      throw new ExportError(`${name} has no matching ${gName}; cannot fold weight norm`);
    }
    if (tensors.has(wName)) {
      throw new ExportError(`${wName} already exists alongside ${name}`);
    }
    if (v.shape.length === 0) {
      throw new ExportError(`${name} is a scalar; weight norm needs an output axis`);
    }
    const outDim = v.shape[0];
    if (g.data.length !== outDim) {
      throw new ExportError(
        `${gName} has ${g.data.length} elements but ${name} has ${outDim} output rows`,
      );
    }
    const rowLen = outDim === 0 ? 0 : v.data.length / outDim;
    const w = new Float32Array(v.data.length);
    for (let o = 0; o < outDim; o++) {
      let ss = 0;
      for (let i = 0; i < rowLen; i++) {
        const x = v.data[o * rowLen + i];
        ss += x * x;
      }
      const norm = Math.sqrt(ss);
      if (norm === 0) {
        throw new ExportError(`${name}: output row ${o} has zero norm; cannot fold`);
      }
      const scale = g.data[o] / norm;
      for (let i = 0; i < rowLen; i++) {
        w[o * rowLen + i] = v.data[o * rowLen + i] * scale;
      }
    }
    out.set(wName, { shape: [...v.shape], data: w });
    consumed.add(name);
    consumed.add(gName);
  }

  for (const [name, t] of tensors) {
    if (consumed.has(name)) continue;
    if (name.endsWith(".weight_g")) {
      const vName = `${name.slice(0, -".weight_g".length)}.weight_v`;
      throw new ExportError(`${name} has no matching ${vName}; cannot fold weight norm`);
    }
    out.set(name, t);
  }
  return out;
}

type Rule = [RegExp, (m: RegExpExecArray) => string];

function encoderRules(ckpt: string, engine: string): Rule[] {
  return [
    [new RegExp(`^${ckpt}\\.pre\\.(weight|bias)$`), (m) => `${engine}.pre.${m[1]}`],
    [new RegExp(`^${ckpt}\\.proj\\.(weight|bias)$`), (m) => `${engine}.proj.${m[1]}`],
    [
      new RegExp(`^${ckpt}\\.enc\\.(in_layers|res_skip_layers)\\.(\\d+)\\.(weight|bias)$`),
      (m) => `${engine}.wn.${m[1]}.${m[2]}.${m[3]}`,
    ],
    [new RegExp(`^${ckpt}\\.enc\\.cond_layer\\.(weight|bias)$`), (m) => `${engine}.wn.cond.${m[1]}`],
  ];
}

const RULES: Rule[] = [
  ...encoderRules("enc_p", "content_encoder"),
  ...encoderRules("enc_q", "posterior_encoder"),
  [/^enc_spk\.lstm\.(weight|bias)_(ih|hh)_l0$/, (m) => `speaker_encoder.lstm.${m[1]}_${m[2]}`],
  [/^enc_spk\.fc\.(weight|bias)$/, (m) => `speaker_encoder.proj.${m[1]}`],
  [
    // even flow indices are couplings; odd ones are parameter-free flips
    /^flow\.flows\.(\d+)\.(pre|post)\.(weight|bias)$/,
    (m) => (Number(m[1]) % 2 === 0
      ? `flow.couplings.${Number(m[1]) / 2}.${m[2]}.${m[3]}`
      : ""),
  ],
  [
    /^flow\.flows\.(\d+)\.enc\.(in_layers|res_skip_layers)\.(\d+)\.(weight|bias)$/,
    (m) => (Number(m[1]) % 2 === 0
      ? `flow.couplings.${Number(m[1]) / 2}.wn.${m[2]}.${m[3]}.${m[4]}`
      : ""),
  ],
  [
    /^flow\.flows\.(\d+)\.enc\.cond_layer\.(weight|bias)$/,
    (m) => (Number(m[1]) % 2 === 0
      ? `flow.couplings.${Number(m[1]) / 2}.wn.cond.${m[2]}`
      : ""),
  ],
  [/^dec\.conv_pre\.(weight|bias)$/, (m) => `decoder.pre.${m[1]}`],
  [/^dec\.cond\.(weight|bias)$/, (m) => `decoder.cond.${m[1]}`],
  [/^dec\.ups\.(\d+)\.(weight|bias)$/, (m) => `decoder.ups.${m[1]}.${m[2]}`],
  [
    /^dec\.resblocks\.(\d+)\.(convs1|convs2)\.(\d+)\.(weight|bias)$/,
    (m) => `decoder.resblocks.${m[1]}.${m[2]}.${m[3]}.${m[4]}`,
  ],
  [/^dec\.conv_post\.(weight|bias)$/, (m) => `decoder.head.${m[1]}`],
  [/^dec\.synthesis_filter$/, () => "decoder.synthesis.taps"],
];

/**
 * Engine tensor name for a checkpoint tensor name (after weight-norm
 * folding), or null when the name has no place in the engine model.
 */
export function mapCheckpointName(name: string): string | null {
  for (const [re, build] of RULES) {
    const m = re.exec(name);
    if (m) {
      const mapped = build(m);
      return mapped === "" ? null : mapped;
    }
  }
  return null;
}

/**
 * Convert a checkpoint into engine weights under the given config.
 * Throws ExportError listing every unmappable tensor, every name
 * collision, and every manifest violation.
 */
export function convertCheckpoint(
  checkpoint: Checkpoint,
  rawConfig: Record<string, unknown>,
): Weights {
  const config: ModelConfig = normalizeConfig(rawConfig);
  const folded = foldWeightNorm(checkpoint.tensors);

  const tensors = new Map<string, { shape: number[]; data: Float32Array }>();
  const unmapped: string[] = [];
  for (const [name, t] of folded) {
    const target = mapCheckpointName(name);
    if (target === null) {
      unmapped.push(name);
      continue;
    }
    if (tensors.has(target)) {
      throw new ExportError(`two checkpoint tensors map to engine tensor ${target}`);
    }
    tensors.set(target, { shape: [...t.shape], data: t.data });
  }
  if (unmapped.length > 0) {
    throw new ExportError(
      `cannot map ${unmapped.length} checkpoint tensor(s) to engine names:\n  ` +
      unmapped.sort().join("\n  "),
    );
  }

  const weights: Weights = { config, tensors };
  const problems = validateManifest(weights);
  if (problems.length > 0) {
    throw new ExportError(
      `converted tensors do not satisfy the engine manifest:\n  ${problems.join("\n  ")}`,
    );
  }
  return weights;
}
