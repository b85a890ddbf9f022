"""Command-line interface.

Subcommands: convert, bench, inspect, audit-loss, dsp, init-random. Every
deliberate failure surfaces as ``error[<Type>]: message`` on stderr with
exit code 1; argparse usage problems exit 2 as usual. Set QVC_LOG to a
level name (debug, info, ...) for progress logging.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from quickvc import __version__, kernels
from quickvc.audio import read_wav, write_wav
from quickvc.bench import format_report, run_benchmark
from quickvc.dsp.mel import mel_spectrogram
from quickvc.dsp.stft import istft, linear_magnitude, stft
from quickvc.errors import InvalidArgument, QvcError, UsageError
from quickvc.features import frames_from_bytes, load_frames, save_frames
from quickvc.losses import (
    adv_loss_d,
    adv_loss_g,
    feature_matching_loss,
    generator_total,
    kl_loss,
    recon_loss,
)
from quickvc.model import DEFAULT_NOISE_SCALE, VoiceConverter
from quickvc.nn.weights import ModelConfig, ModelWeights, random_weights

log = logging.getLogger("quickvc")

DSP_ROUNDTRIP_TOLERANCE = 1e-6


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quickvc",
        description="Voice-conversion inference engine",
    )
    parser.add_argument("--version", action="version", version=f"quickvc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="synthesize audio from content features")
    p.add_argument("--model", required=True, help="QVCW weights container")
    p.add_argument("--features", help="QVCF content features")
    p.add_argument("--source-wav", help=argparse.SUPPRESS)
    ref = p.add_mutually_exclusive_group(required=True)
    ref.add_argument("--ref-wav", help="reference utterance for the target voice")
    ref.add_argument("--ref-embedding", help="QVCF with one precomputed embedding row")
    p.add_argument("--out", required=True, help="output WAV path")
    p.add_argument("--noise-scale", type=float, default=DEFAULT_NOISE_SCALE)
    p.add_argument("--seed", type=int, default=0, help="prior noise seed")

    p = sub.add_parser("bench", help="measure synthesis throughput")
    p.add_argument("--model", required=True)
    p.add_argument("--seconds", type=float, default=10.0, help="audio per stream")
    p.add_argument("--threads", type=int, default=1, help="concurrent streams")
    p.add_argument("--mode", choices=["full", "decoder"], default="full")
    p.add_argument(
        "--backend",
        choices=["auto", "cython", "numpy", "both"],
        default="auto",
        help="kernel backend to time ('both' compares them)",
    )
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--warmup", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("inspect", help="describe a QVCW or QVCF container")
    p.add_argument("path")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("audit-loss", help="evaluate training objectives on saved tensors")
    p.add_argument("--recon-a", help="QVCF operand for the reconstruction term")
    p.add_argument("--recon-b", help="QVCF operand for the reconstruction term")
    p.add_argument(
        "--kl",
        nargs=6,
        metavar=("Z_Q", "M_Q", "LOGS_Q", "Z_P", "M_P", "LOGS_P"),
        help="six QVCF files: posterior sample/mean/log-std, flow output, prior mean/log-std",
    )
    p.add_argument("--logdet", type=float, default=0.0, help="flow log-determinant for --kl")
    p.add_argument("--disc-real", nargs="+", help="QVCF per-discriminator real scores")
    p.add_argument("--disc-fake", nargs="+", help="QVCF per-discriminator fake scores")
    p.add_argument("--fm-real", nargs="+", help="QVCF per-layer real features (one discriminator)")
    p.add_argument("--fm-fake", nargs="+", help="QVCF per-layer fake features (one discriminator)")
    p.add_argument("--unweighted", action="store_true", help="sum terms without training weights")

    p = sub.add_parser("dsp", help="spectrogram utilities")
    dsp_sub = p.add_subparsers(dest="dsp_command", required=True)
    rt = dsp_sub.add_parser("roundtrip", help="analysis/resynthesis error for a WAV")
    rt.add_argument("wav")
    rt.add_argument("--json", action="store_true")
    for name, helptext in (
        ("mel", "write log-mel frames of a WAV as QVCF"),
        ("linear", "write linear magnitude frames of a WAV as QVCF"),
    ):
        sp = dsp_sub.add_parser(name, help=helptext)
        sp.add_argument("wav")
        sp.add_argument("--out", required=True)

    p = sub.add_parser("init-random", help="write a randomly initialized model")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="JSON file with config overrides")

    return parser


def _load_speaker(model: VoiceConverter, args) -> np.ndarray:
    if args.ref_wav:
        wave = read_wav(args.ref_wav)
        log.info("reference %s: %d samples", args.ref_wav, wave.size)
        return model.speaker_embedding(wave)
    rows = load_frames(args.ref_embedding)
    if rows.shape != (1, model.config.embed_dim):
        raise InvalidArgument(
            f"--ref-embedding must hold exactly one ({model.config.embed_dim},) "
            f"row, got shape {tuple(rows.shape)}"
        )
    return rows[0].astype(np.float64)


def _cmd_convert(args) -> int:
    if args.source_wav and not args.features:
        raise UsageError(
            "convert consumes precomputed content features, not raw source "
            "audio; run `qvc-export features` on the source WAV first, then "
            "pass the result via --features"
        )
    if not args.features:
        raise UsageError("--features is required (QVCF from the companion exporter)")
    model = VoiceConverter.from_file(args.model)
    features = load_frames(args.features)
    speaker = _load_speaker(model, args)
    log.info(
        "converting %d frames with noise_scale=%g seed=%d",
        features.shape[0], args.noise_scale, args.seed,
    )
    wave = model.convert(
        features, speaker, noise_scale=args.noise_scale, seed=args.seed
    )
    write_wav(args.out, wave)
    duration = wave.size / model.config.sample_rate
    print(f"wrote {args.out}: {wave.size} samples ({duration:.2f} s)")
    return 0


def _cmd_bench(args) -> int:
    model = VoiceConverter.from_file(args.model)
    backends = (
        list(kernels.available_backends()) if args.backend == "both" else [args.backend]
    )
    reports = []
    previous = kernels.active_name()
    try:
        for name in backends:
            kernels.set_backend(name)
            reports.append(
                run_benchmark(
                    model,
                    seconds=args.seconds,
                    threads=args.threads,
                    mode=args.mode,
                    warmup=args.warmup,
                    reps=args.reps,
                    seed=args.seed,
                )
            )
    finally:
        kernels.set_backend(previous)
    if args.json:
        payload = reports[0] if len(reports) == 1 else {"runs": reports}
        print(json.dumps(payload, indent=2))
    else:
        print("\n\n".join(format_report(r) for r in reports))
    return 0


def _cmd_inspect(args) -> int:
    with open(args.path, "rb") as fh:
        blob = fh.read()
    if blob[:4] == b"QVCW":
        weights = ModelWeights.from_bytes(blob)
        weights.validate_manifest()
        cfg = weights.config
        info = {
            "format": "QVCW",
            "version": 1,
            "file_bytes": len(blob),
            "tensor_count": len(weights.tensors),
            "parameter_count": weights.param_count(),
            "samples_per_frame": cfg.hop_length,
            "config": cfg.to_dict(),
        }
        if args.json:
            print(json.dumps(info, indent=2))
        else:
            print(f"QVCW v1, {len(blob)} bytes")
            print(f"tensors: {info['tensor_count']}, parameters: {info['parameter_count']}")
            print(
                f"frame chain: {cfg.upsample_scales} x istft_hop {cfg.istft_hop} "
                f"x {cfg.subbands} bands = {cfg.hop_length} samples/frame"
            )
            print(f"sample rate {cfg.sample_rate} Hz, latent {cfg.latent_channels}")
        return 0
    if blob[:4] == b"QVCF":
        frames = frames_from_bytes(blob)
        info = {
            "format": "QVCF",
            "version": 1,
            "file_bytes": len(blob),
            "frames": int(frames.shape[0]),
            "dim": int(frames.shape[1]),
        }
        if args.json:
            print(json.dumps(info, indent=2))
        else:
            print(f"QVCF v1, {len(blob)} bytes: {frames.shape[0]} frames x {frames.shape[1]}")
        return 0
    raise InvalidArgument(
        f"{args.path} is neither QVCW nor QVCF (magic {blob[:4]!r})"
    )


def _cmd_audit_loss(args) -> int:
    report = {}
    if bool(args.recon_a) != bool(args.recon_b):
        raise UsageError("--recon-a and --recon-b must be given together")
    if args.recon_a:
        report["recon"] = recon_loss(load_frames(args.recon_a), load_frames(args.recon_b))
    if args.kl:
        operands = [load_frames(p) for p in args.kl]
        report["kl"] = kl_loss(*operands, args.logdet)
    if bool(args.disc_real) != bool(args.disc_fake):
        raise UsageError("--disc-real and --disc-fake must be given together")
    if args.disc_real:
        real = [load_frames(p) for p in args.disc_real]
        fake = [load_frames(p) for p in args.disc_fake]
        report["adv_g"] = adv_loss_g(fake)
        report["adv_d"] = adv_loss_d(real, fake)
    if bool(args.fm_real) != bool(args.fm_fake):
        raise UsageError("--fm-real and --fm-fake must be given together")
    if args.fm_real:
        report["feature_matching"] = feature_matching_loss(
            [[load_frames(p) for p in args.fm_real]],
            [[load_frames(p) for p in args.fm_fake]],
        )
    if not report:
        raise UsageError("nothing to audit; pass --recon-a/b, --kl, --disc-*, or --fm-*")
    if all(k in report for k in ("recon", "kl", "adv_g", "feature_matching")):
        report["generator_total"] = generator_total(
            report["recon"],
            report["kl"],
            report["adv_g"],
            report["feature_matching"],
            unweighted=args.unweighted,
        )
    print(json.dumps(report, indent=2))
    return 0


def _cmd_dsp(args) -> int:
    wave = read_wav(args.wav)
    if args.dsp_command == "roundtrip":
        spec = stft(wave)
        rebuilt = istft(spec, length=wave.size)
        err = float(np.max(np.abs(rebuilt - wave))) if wave.size else 0.0
        ok = err <= DSP_ROUNDTRIP_TOLERANCE
        if args.json:
            print(json.dumps({
                "samples": int(wave.size),
                "frames": int(spec.shape[0]),
                "max_abs_error": err,
                "tolerance": DSP_ROUNDTRIP_TOLERANCE,
                "pass": ok,
            }))
        else:
            state = "PASS" if ok else "FAIL"
            print(f"{state}: max |x - istft(stft(x))| = {err:.3e} over {wave.size} samples")
        return 0 if ok else 1
    if args.dsp_command == "mel":
        save_frames(args.out, mel_spectrogram(wave))
    else:
        save_frames(args.out, linear_magnitude(wave))
    print(f"wrote {args.out}")
    return 0


def _cmd_init_random(args) -> int:
    overrides = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            overrides = json.load(fh)
    cfg = ModelConfig.from_dict(overrides)
    weights = random_weights(cfg, seed=args.seed)
    weights.save(args.out)
    print(f"wrote {args.out}: {weights.param_count()} parameters (seed {args.seed})")
    return 0


_COMMANDS = {
    "convert": _cmd_convert,
    "bench": _cmd_bench,
    "inspect": _cmd_inspect,
    "audit-loss": _cmd_audit_loss,
    "dsp": _cmd_dsp,
    "init-random": _cmd_init_random,
}


def main(argv=None) -> int:
    level = os.environ.get("QVC_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except QvcError as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error[OSError]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
