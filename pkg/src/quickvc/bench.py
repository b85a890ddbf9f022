"""Synthesis-speed benchmark.

Protocol: build synthetic inputs for a fixed audio duration once per
stream, run warm-up passes, then time a fixed number of repetitions and
report the median. ``threads`` runs that many independent streams
concurrently (one model, thread-safe read-only weights); per-stream
inputs depend only on the stream's seed, so results are identical no
matter how the streams are scheduled.

Modes: ``full`` exercises speaker encoder, content encoder, prior
sampling, flow and decoder; ``decoder`` times decoder_forward alone.
Input synthesis stays outside the timed region, so the reported harness
overhead (wall time minus the sum of directly timed calls) covers only
timer reads and thread scheduling.
"""

import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from quickvc import kernels
from quickvc.errors import InvalidArgument
from quickvc.model import VoiceConverter

SCHEMA = "quickvc-bench/1"

# throughput of the original implementation on published desktop hardware,
# for context next to this engine's numbers
PUBLISHED_REFERENCE_KHZ = {"cpu": 280.00, "gpu": 5320.78}

_REFERENCE_MEL_FRAMES = 100  # ~2 s of reference audio for the speaker stage


class _Stream:
    """Fixed inputs for one benchmark stream, derived only from the seed.

    The prior noise is drawn here once; every repetition reuses it, so a
    stream's output is a pure function of (weights, seed)."""

    def __init__(self, model: VoiceConverter, frames: int, seed: int, mode: str):
        cfg = model.config
        rng = np.random.default_rng(np.uint64(seed))
        self.features = rng.standard_normal((frames, cfg.content_dim))
        self.mel = rng.standard_normal((_REFERENCE_MEL_FRAMES, cfg.mel_bands))
        self.eps = rng.standard_normal((cfg.latent_channels, frames))
        if mode == "decoder":
            # encoders run once at setup; reps hit only the decoder
            self.z = self.eps
            self.g = model.speaker_encoder(self.mel)[:, None]


def _run_stream_full(model: VoiceConverter, stream: _Stream):
    stages = {}
    t0 = time.perf_counter()
    speaker = model.speaker_encoder(stream.mel)
    t1 = time.perf_counter()
    stages["speaker_encoder"] = t1 - t0
    mean_p, log_std_p = model.content_encoder(stream.features)
    t2 = time.perf_counter()
    stages["content_encoder"] = t2 - t1
    z_prior = mean_p + np.exp(log_std_p) * stream.eps
    g = speaker[:, None]
    z = model.flow.inverse(z_prior, g)
    t3 = time.perf_counter()
    stages["flow"] = t3 - t2
    wave = model.decoder(z, g)
    stages["decoder"] = time.perf_counter() - t3
    return wave, stages


def _run_stream_decoder(model: VoiceConverter, stream: _Stream):
    t0 = time.perf_counter()
    wave = model.decoder(stream.z, stream.g)
    stages = {"decoder": time.perf_counter() - t0}
    return wave, stages


def run_benchmark(
    model: VoiceConverter,
    seconds: float = 10.0,
    threads: int = 1,
    mode: str = "full",
    warmup: int = 1,
    reps: int = 5,
    seed: int = 0,
) -> dict:
    """Measure synthesis throughput; returns a JSON-ready report."""
    if mode not in ("full", "decoder"):
        raise InvalidArgument(f"mode must be 'full' or 'decoder', got {mode!r}")
    if seconds <= 0 or threads < 1 or reps < 1 or warmup < 0:
        raise InvalidArgument(
            "need seconds > 0, threads >= 1, reps >= 1, warmup >= 0"
        )
    cfg = model.config
    frames = max(1, round(seconds * cfg.sample_rate / cfg.hop_length))
    samples_per_stream = frames * cfg.hop_length
    runner = _run_stream_full if mode == "full" else _run_stream_decoder
    streams = [_Stream(model, frames, seed + i, mode) for i in range(threads)]

    def one_rep():
        if threads == 1:
            results = [runner(model, streams[0])]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                futures = [pool.submit(runner, model, s) for s in streams]
                results = [f.result() for f in futures]
        return results

    for _ in range(warmup):
        one_rep()

    rep_walls = []
    rep_stages = []
    for _ in range(reps):
        t0 = time.perf_counter()
        results = one_rep()
        wall = time.perf_counter() - t0
        rep_walls.append(wall)
        merged = {}
        for _, stages in results:
            for name, dt in stages.items():
                merged[name] = merged.get(name, 0.0) + dt
        rep_stages.append(merged)

    order = np.argsort(rep_walls)
    mid = order[len(order) // 2]
    wall = rep_walls[mid]
    stages = rep_stages[mid]
    total_samples = samples_per_stream * threads
    stage_sum = sum(stages.values())
    overhead = max(0.0, wall - stage_sum) / wall if wall > 0 else 0.0
    return {
        "schema": SCHEMA,
        "mode": mode,
        "kernel_backend": kernels.active_name(),
        "threads": threads,
        "seconds_of_audio_per_stream": samples_per_stream / cfg.sample_rate,
        "samples_total": total_samples,
        "warmup": warmup,
        "reps": reps,
        "seed": seed,
        "median_wall_s": wall,
        "per_rep_khz": [total_samples / w / 1000.0 for w in rep_walls],
        "throughput_khz": total_samples / wall / 1000.0,
        "stages_s": stages,
        "harness_overhead_fraction": overhead,
        "published_reference_khz": dict(PUBLISHED_REFERENCE_KHZ),
    }


def format_report(report: dict) -> str:
    lines = [
        f"backend={report['kernel_backend']} mode={report['mode']} "
        f"threads={report['threads']}",
        f"audio {report['seconds_of_audio_per_stream']:.2f} s/stream, "
        f"{report['samples_total']} samples total",
        f"median wall {report['median_wall_s']:.3f} s over {report['reps']} reps "
        f"-> {report['throughput_khz']:.1f} kHz",
    ]
    stages = ", ".join(f"{k} {v:.3f}s" for k, v in report["stages_s"].items())
    lines.append(f"stages: {stages}")
    lines.append(
        f"harness overhead {100 * report['harness_overhead_fraction']:.2f}%"
    )
    ref = report["published_reference_khz"]
    lines.append(
        f"published reference (original implementation): "
        f"{ref['cpu']:.2f} kHz CPU, {ref['gpu']:.2f} kHz GPU"
    )
    return "\n".join(lines)
