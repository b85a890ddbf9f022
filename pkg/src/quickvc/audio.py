"""WAV file I/O: 16-bit PCM mono at the engine's sample rate.

Reading maps int16 to float64 in [-1, 1) by dividing by 32768; writing
clips to [-1, 1] and scales by 32767 with round-half-away-from-zero, so a
written file read back differs from the source by at most one quantization
step.
"""

import os
import wave as _wave

import numpy as np

from quickvc.dsp.stft import SAMPLE_RATE
from quickvc.errors import InvalidArgument, LoadError, ShapeError


def read_wav(path: str) -> np.ndarray:
    """Load a mono 16-bit PCM WAV at 16 kHz into a float64 array.

    An empty data chunk yields a zero-length waveform, not an error.
    """
    path = os.fspath(path)  # wave.open treats non-str as a stream
    try:
        with _wave.open(path, "rb") as fh:
            channels = fh.getnchannels()
            width = fh.getsampwidth()
            rate = fh.getframerate()
            n = fh.getnframes()
            raw = fh.readframes(n)
    except (OSError, _wave.Error, EOFError) as exc:
        raise LoadError(f"cannot read WAV {path}: {exc}") from exc
    if channels != 1:
        raise InvalidArgument(
            f"{path}: expected mono audio, file has {channels} channels"
        )
    if width != 2:
        raise InvalidArgument(
            f"{path}: expected 16-bit PCM, file has {8 * width}-bit samples"
        )
    if rate != SAMPLE_RATE:
        raise InvalidArgument(
            f"{path}: unsupported sample rate {rate} Hz; the engine runs at "
            f"{SAMPLE_RATE} Hz, resample first"
        )
    return np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0


def write_wav(path: str, samples: np.ndarray) -> None:
    """Write a float waveform as mono 16-bit PCM at 16 kHz."""
    samples = np.asarray(samples)
    if samples.ndim != 1:
        raise ShapeError(f"expected a 1-D waveform, got shape {samples.shape}")
    if samples.size and not np.all(np.isfinite(samples)):
        raise InvalidArgument("waveform contains non-finite samples")
    clipped = np.clip(samples.astype(np.float64), -1.0, 1.0)
    ints = np.round(clipped * 32767.0).astype("<i2")
    with _wave.open(os.fspath(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(SAMPLE_RATE)
        fh.writeframes(ints.tobytes())
