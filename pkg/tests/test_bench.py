import numpy as np
import pytest

from quickvc.bench import (
    PUBLISHED_REFERENCE_KHZ,
    SCHEMA,
    _Stream,
    _run_stream_decoder,
    _run_stream_full,
    format_report,
    run_benchmark,
)
from quickvc.errors import InvalidArgument
from quickvc.model import VoiceConverter
from quickvc.nn.weights import random_weights

from conftest import make_small_config


@pytest.fixture(scope="module")
def model():
    cfg = make_small_config()
    return VoiceConverter(random_weights(cfg, seed=4))


def test_report_schema_and_fields(model):
    report = run_benchmark(model, seconds=0.1, reps=2, warmup=0)
    assert report["schema"] == SCHEMA
    assert report["mode"] == "full"
    assert report["threads"] == 1
    assert report["kernel_backend"] in ("cython", "numpy")
    assert len(report["per_rep_khz"]) == 2
    assert report["throughput_khz"] > 0
    assert set(report["stages_s"]) == {
        "speaker_encoder", "content_encoder", "flow", "decoder",
    }
    assert report["published_reference_khz"] == PUBLISHED_REFERENCE_KHZ
    # frames = round(0.1 * 16000 / 40) = 40 -> 1600 samples
    assert report["samples_total"] == 1600
    assert report["seconds_of_audio_per_stream"] == pytest.approx(0.1)


def test_median_wall_is_middle_rep(model):
    report = run_benchmark(model, seconds=0.05, reps=5, warmup=0)
    walls = sorted(report["samples_total"] / (k * 1000.0) for k in report["per_rep_khz"])
    assert report["median_wall_s"] == pytest.approx(walls[2], rel=1e-12)


def test_decoder_mode_times_decoder_only(model):
    report = run_benchmark(model, seconds=0.1, mode="decoder", reps=2, warmup=1)
    assert set(report["stages_s"]) == {"decoder"}


def test_harness_overhead_small_in_decoder_mode(model):
    report = run_benchmark(model, seconds=1.0, mode="decoder", reps=3, warmup=1)
    assert report["harness_overhead_fraction"] < 0.01


def test_decoder_mode_at_least_as_fast_as_full(model):
    # decoder mode skips three stages, so its throughput can't be lower
    full = run_benchmark(model, seconds=0.5, mode="full", reps=3, warmup=1)
    dec = run_benchmark(model, seconds=0.5, mode="decoder", reps=3, warmup=1)
    assert dec["throughput_khz"] >= full["throughput_khz"] * 0.9


def test_threads_scale_samples_total(model):
    one = run_benchmark(model, seconds=0.05, threads=1, reps=1, warmup=0)
    three = run_benchmark(model, seconds=0.05, threads=3, reps=1, warmup=0)
    assert three["samples_total"] == 3 * one["samples_total"]
    assert three["threads"] == 3


def test_stream_output_depends_only_on_seed(model):
    # the same seed must synthesize the same audio whether the stream runs
    # alone or next to others, so scheduling can't change results
    frames = 20
    for mode, runner in (("full", _run_stream_full), ("decoder", _run_stream_decoder)):
        a, _ = runner(model, _Stream(model, frames, 9, mode))
        b, _ = runner(model, _Stream(model, frames, 9, mode))
        c, _ = runner(model, _Stream(model, frames, 10, mode))
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)


def test_stream_reps_reuse_inputs(model):
    stream = _Stream(model, 15, 2, "full")
    a, _ = _run_stream_full(model, stream)
    b, _ = _run_stream_full(model, stream)
    np.testing.assert_array_equal(a, b)


def test_invalid_parameters_rejected(model):
    with pytest.raises(InvalidArgument):
        run_benchmark(model, mode="gpu")
    with pytest.raises(InvalidArgument):
        run_benchmark(model, seconds=0.0)
    with pytest.raises(InvalidArgument):
        run_benchmark(model, threads=0)
    with pytest.raises(InvalidArgument):
        run_benchmark(model, reps=0)
    with pytest.raises(InvalidArgument):
        run_benchmark(model, warmup=-1)


def test_format_report_mentions_reference(model):
    report = run_benchmark(model, seconds=0.05, reps=1, warmup=0)
    text = format_report(report)
    assert "published reference (original implementation)" in text
    assert "280.00 kHz CPU" in text
    assert "5320.78 kHz GPU" in text
    assert "harness overhead" in text
