#!/usr/bin/env node
/**
 * qvc-export - companion tools for the voice-conversion engine.
 *
 * Talks to the engine exclusively through its public surfaces: the
 * `quickvc` CLI and the QVCW / QVCF / WAV file formats.
 *
 * Usage:
 *   qvc-export features --out-dir DIR [--manifest PATH] WAV [WAV ...]
 *       Extract content features from 16 kHz mono WAVs; one .qvcf per
 *       input. Unreadable files are reported and skipped; the batch
 *       continues. Exit status 1 if any file failed.
 *
 *   qvc-export weights --checkpoint CKPT.safetensors --config CONFIG.json --out MODEL.qvcw
 *       Convert a training checkpoint to an engine container: folds
 *       weight normalization, renames tensors per the published map,
 *       and refuses to write anything the engine would not load.
 *
 *   qvc-export weights --validate MODEL.qvcw
 *       Strict-read an existing container and check its tensor table
 *       against the manifest its config demands.
 *
 *   qvc-export cross-check WAV [--engine-cli CMD] [--json]
 *       Compare this tool's mel and linear spectrograms against the
 *       engine's for the same audio. Exit status 0 only if both agree
 *       within 1e-4.
 */

import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { basename, join } from "node:path";

import { crossCheck, type CrossCheckReport } from "./crosscheck.js";
import {
  EXTRACTOR_ID,
  EXTRACTOR_REVISION,
  extractFeatures,
  FEATURE_DIM,
  FRAME_HOP,
} from "./features.js";
import { readFrames, writeFrames } from "./qvcf.js";
import { readWeights, validateManifest, writeWeights } from "./qvcw.js";
import { readSafetensors } from "./safetensors.js";
import { readWav } from "./wav.js";
import { convertCheckpoint } from "./weights.js";

class UsageError extends Error {}

const USAGE = `usage: qvc-export <command> [options]

commands:
  features     extract content features from WAV files to QVCF
  weights      convert a checkpoint to QVCW, or validate an existing QVCW
  cross-check  compare local mel/linear spectrograms against the engine's

run "qvc-export <command> --help" for per-command options`;

const COMMAND_USAGE: Record<string, string> = {
  features: `usage: qvc-export features --out-dir DIR [--manifest PATH] WAV [WAV ...]

writes one <input-stem>.qvcf per readable input into DIR, plus a JSON
manifest (stdout unless --manifest gives a path) recording the extractor
revision and per-file frame counts. A failing file does not stop the
batch but makes the exit status 1.`,
  weights: `usage: qvc-export weights --checkpoint CKPT.safetensors --config CONFIG.json --out MODEL.qvcw
       qvc-export weights --validate MODEL.qvcw

conversion folds NAME.weight_v/NAME.weight_g pairs into NAME.weight,
renames checkpoint tensors to engine names, and writes a container the
engine is guaranteed to load; any unmappable tensor aborts with its
name. --validate strict-reads an existing container instead.`,
  "cross-check": `usage: qvc-export cross-check WAV [--engine-cli CMD] [--json]

asks the engine (default command: quickvc) for mel and linear frames of
WAV, recomputes both locally, and reports the max absolute deviation
(tolerance 1e-4). On disagreement, probes alternative framing
conventions to name the mismatch.`,
};

interface ParsedArgs {
  flags: Map<string, string | true>;
  positionals: string[];
}

/** spec maps each --flag to true (takes a value) or false (boolean). */
function parseArgs(argv: string[], spec: Record<string, boolean>): ParsedArgs {
  const flags = new Map<string, string | true>();
  const positionals: string[] = [];
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--help" || arg === "-h") {
      flags.set("help", true);
    } else if (arg.startsWith("--")) {
      const name = arg.slice(2);
      if (!(name in spec)) throw new UsageError(`unknown option --${name}`);
      if (spec[name]) {
        const value = argv[++i];
        if (value === undefined) throw new UsageError(`--${name} needs a value`);
        flags.set(name, value);
      } else {
        flags.set(name, true);
      }
    } else {
      positionals.push(arg);
    }
  }
  return { flags, positionals };
}

function requireValue(args: ParsedArgs, name: string): string {
  const v = args.flags.get(name);
  if (typeof v !== "string") throw new UsageError(`--${name} is required`);
  return v;
}

function cmdFeatures(argv: string[]): number {
  const args = parseArgs(argv, { "out-dir": true, manifest: true });
  if (args.flags.has("help")) {
    process.stdout.write(COMMAND_USAGE.features + "\n");
    return 0;
  }
  const outDir = requireValue(args, "out-dir");
  if (args.positionals.length === 0) {
    throw new UsageError("no input WAV files given");
  }

  interface FileEntry {
    input: string;
    output?: string;
    frames?: number;
    dim?: number;
    error?: string;
  }
  const files: FileEntry[] = [];
  const usedOutputs = new Set<string>();
  let failed = 0;

  for (const input of args.positionals) {
    const stem = basename(input).replace(/\.wav$/i, "");
    const output = join(outDir, `${stem}.qvcf`);
    try {
      if (usedOutputs.has(output)) {
        throw new Error(`output path collision: ${output} already written in this batch`);
      }
      const samples = readWav(input);
      const { frames, dim, data } = extractFeatures(samples);
      writeFrames(output, frames, dim, data);
      usedOutputs.add(output);
      files.push({ input, output, frames, dim });
      process.stderr.write(`features: ${input} -> ${output} (${frames} x ${dim})\n`);
    } catch (err) {
      failed += 1;
      const message = err instanceof Error ? err.message : String(err);
      files.push({ input, error: message });
      process.stderr.write(`error[${errorName(err)}]: ${input}: ${message}\n`);
    }
  }

  const manifest = {
    schema: "qvc-export-manifest/1",
    extractor: {
      id: EXTRACTOR_ID,
      revision: EXTRACTOR_REVISION,
      dim: FEATURE_DIM,
      frame_hop: FRAME_HOP,
    },
    files,
  };
  const manifestJson = JSON.stringify(manifest, null, 2) + "\n";
  const manifestPath = args.flags.get("manifest");
  if (typeof manifestPath === "string") {
    writeFileSync(manifestPath, manifestJson);
  } else {
    process.stdout.write(manifestJson);
  }
  process.stderr.write(
    `features: ${files.length - failed} of ${files.length} file(s) exported\n`,
  );
  return failed === 0 ? 0 : 1;
}

function cmdWeights(argv: string[]): number {
  const args = parseArgs(argv, { checkpoint: true, config: true, out: true, validate: true });
  if (args.flags.has("help")) {
    process.stdout.write(COMMAND_USAGE.weights + "\n");
    return 0;
  }
  if (args.positionals.length > 0) {
    throw new UsageError(`unexpected argument ${args.positionals[0]}`);
  }

  const validatePath = args.flags.get("validate");
  if (typeof validatePath === "string") {
    if (args.flags.has("checkpoint") || args.flags.has("config") || args.flags.has("out")) {
      throw new UsageError("--validate cannot be combined with conversion options");
    }
    const weights = readWeights(validatePath);
    const problems = validateManifest(weights);
    if (problems.length > 0) {
      process.stderr.write(
        `validate: ${validatePath} FAILED\n  ${problems.join("\n  ")}\n`,
      );
      return 1;
    }
    let params = 0;
    for (const t of weights.tensors.values()) params += t.data.length;
    process.stdout.write(
      `validate: ${validatePath} ok (${weights.tensors.size} tensors, ${params} parameters)\n`,
    );
    return 0;
  }

  const checkpointPath = requireValue(args, "checkpoint");
  const configPath = requireValue(args, "config");
  const outPath = requireValue(args, "out");

  const checkpoint = readSafetensors(checkpointPath);
  let rawConfig: unknown;
  try {
    rawConfig = JSON.parse(readFileSync(configPath, "utf-8"));
  } catch (err) {
    throw new UsageError(`cannot parse config ${configPath}: ${err}`);
  }
  const weights = convertCheckpoint(checkpoint, rawConfig as Record<string, unknown>);
  writeWeights(outPath, weights);
  let params = 0;
  for (const t of weights.tensors.values()) params += t.data.length;
  process.stdout.write(
    `weights: wrote ${outPath} (${weights.tensors.size} tensors, ${params} parameters)\n`,
  );
  return 0;
}

/** Run the engine CLI; returns stdout. Throws with stderr on failure. */
function runEngine(engineCli: string, cliArgs: string[]): string {
  const parts = engineCli.split(/\s+/).filter((p) => p.length > 0);
  const result = spawnSync(parts[0], [...parts.slice(1), ...cliArgs], {
    encoding: "utf-8",
  });
  if (result.error) {
    const code = (result.error as NodeJS.ErrnoException).code;
    if (code === "ENOENT") {
      throw new Error(
        `engine CLI "${parts[0]}" not found; install the engine or pass --engine-cli`,
      );
    }
    throw result.error;
  }
  if (result.status !== 0) {
    throw new Error(
      `engine command "${engineCli} ${cliArgs.join(" ")}" exited with ` +
      `${result.status}: ${result.stderr.trim()}`,
    );
  }
  return result.stdout;
}

function cmdCrossCheck(argv: string[]): number {
  const args = parseArgs(argv, { "engine-cli": true, json: false });
  if (args.flags.has("help")) {
    process.stdout.write(COMMAND_USAGE["cross-check"] + "\n");
    return 0;
  }
  if (args.positionals.length !== 1) {
    throw new UsageError("cross-check takes exactly one WAV path");
  }
  const wavPath = args.positionals[0];
  const engineCli = (args.flags.get("engine-cli") as string | undefined) ?? "quickvc";
  const wave = readWav(wavPath);

  const tmp = mkdtempSync(join(tmpdir(), "qvc-crosscheck-"));
  const reports: CrossCheckReport[] = [];
  try {
    for (const kind of ["mel", "linear"] as const) {
      const framesPath = join(tmp, `${kind}.qvcf`);
      runEngine(engineCli, ["dsp", kind, wavPath, "--out", framesPath]);
      reports.push(crossCheck(wave, readFrames(framesPath), kind));
    }
  } finally {
    rmSync(tmp, { recursive: true, force: true });
  }

  const allPass = reports.every((r) => r.pass);
  if (args.flags.has("json")) {
    process.stdout.write(
      JSON.stringify(
        { schema: "qvc-export-crosscheck/1", wav: wavPath, pass: allPass, checks: reports },
        null,
        2,
      ) + "\n",
    );
  } else {
    for (const r of reports) {
      const dev = r.maxAbsDeviation === null
        ? "shape mismatch"
        : `max abs deviation ${r.maxAbsDeviation.toExponential(3)}`;
      process.stdout.write(
        `cross-check ${r.kind}: ${dev} (tolerance ${r.tolerance}) - ` +
        `${r.pass ? "PASS" : "FAIL"}\n`,
      );
      if (r.diagnosis) process.stdout.write(`  diagnosis: ${r.diagnosis}\n`);
    }
  }
  return allPass ? 0 : 1;
}

function errorName(err: unknown): string {
  if (err instanceof Error) return err.constructor.name;
  return "Error";
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    switch (command) {
      case "features":
        return cmdFeatures(rest);
      case "weights":
        return cmdWeights(rest);
      case "cross-check":
        return cmdCrossCheck(rest);
      case "--help":
      case "-h":
      case undefined:
        process.stdout.write(USAGE + "\n");
        return command === undefined ? 2 : 0;
      default:
        throw new UsageError(`unknown command ${command}`);
    }
  } catch (err) {
    if (err instanceof UsageError) {
      process.stderr.write(`error[UsageError]: ${err.message}\n`);
      const hint = command && COMMAND_USAGE[command] ? COMMAND_USAGE[command] : USAGE;
      process.stderr.write(hint + "\n");
      return 2;
    }
    const message = err instanceof Error ? err.message : String(err);
    process.stderr.write(`error[${errorName(err)}]: ${message}\n`);
    return 1;
  }
}

process.exitCode = main(process.argv.slice(2));
