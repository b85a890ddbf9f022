"""Short-time Fourier analysis and resynthesis.

Conventions (normative for the whole package, spelled out in docs/dsp.md):

- periodic Hann window, ``w[k] = 0.5 - 0.5*cos(2*pi*k/n)`` for k = 0..n-1
- analysis centers each frame by reflect-padding ``n_fft // 2`` samples
  on both ends of the signal
- frame count ``T = 1 + len(x) // hop_length``
- forward transform is unnormalized; resynthesis overlap-adds windowed
  frames and divides by the overlap-added squared window
"""

import numpy as np

from quickvc.dsp.fft import irfft, rfft
from quickvc.errors import InvalidArgument, NumericalError, ShapeError

SAMPLE_RATE = 16000
N_FFT = 1280
HOP_LENGTH = 320
WIN_LENGTH = 1280

# Overlap-added squared-window values below this are treated as a degenerate
# analysis setup rather than divided through.
_WINDOW_SUM_FLOOR = 1e-8


def hann_window(n: int) -> np.ndarray:
    """Periodic Hann window of length ``n``.

    Periodic (DFT-even) rather than symmetric: the denominator is ``n``,
    not ``n - 1``, which is what makes fixed-hop overlap-adds come out
    constant.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidArgument(f"window length must be a positive integer, got {n!r}")
    k = np.arange(n, dtype=np.float64)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * k / n)


def _padded_window(n_fft: int, win_length: int) -> np.ndarray:
    w = hann_window(win_length)
    if win_length == n_fft:
        return w
    out = np.zeros(n_fft)
    left = (n_fft - win_length) // 2
    out[left : left + win_length] = w
    return out


def _validate_frame_params(n_fft: int, hop_length: int, win_length: int) -> None:
    if n_fft < 2 or n_fft % 2 != 0:
        raise InvalidArgument(f"n_fft must be even and >= 2, got {n_fft}")
    if hop_length < 1:
        raise InvalidArgument(f"hop_length must be >= 1, got {hop_length}")
    if not 1 <= win_length <= n_fft:
        raise InvalidArgument(
            f"win_length must be in [1, n_fft], got {win_length} with n_fft={n_fft}"
        )


def stft(
    x: np.ndarray,
    n_fft: int = N_FFT,
    hop_length: int = HOP_LENGTH,
    win_length: int = WIN_LENGTH,
) -> np.ndarray:
    """Complex spectrogram of a 1-D signal, shape (T, n_fft//2 + 1).

    ``T = 1 + len(x) // hop_length``. Raises InvalidArgument for empty or
    too-short input (the signal must cover one reflect pad, i.e.
    ``len(x) > n_fft // 2``).
    """
    _validate_frame_params(n_fft, hop_length, win_length)
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeError(f"stft expects a 1-D signal, got shape {x.shape}")
    if x.size == 0:
        raise InvalidArgument("stft input is empty")
    pad = n_fft // 2
    if x.size <= pad:
        raise InvalidArgument(
            f"stft input too short: {x.size} samples, need more than {pad}"
        )
    frames_total = 1 + x.size // hop_length
    padded = np.pad(x, pad, mode="reflect")
    window = _padded_window(n_fft, win_length)
    frames = np.lib.stride_tricks.sliding_window_view(padded, n_fft)[::hop_length]
    frames = frames[:frames_total]
    return rfft(frames * window)


def istft(
    spec: np.ndarray,
    n_fft: int = N_FFT,
    hop_length: int = HOP_LENGTH,
    win_length: int = WIN_LENGTH,
    length: int | None = None,
) -> np.ndarray:
    """Overlap-add inverse of :func:`stft`.

    ``spec`` is (T, n_fft//2 + 1) complex. The output starts ``n_fft // 2``
    samples into the overlap-add (undoing the analysis centering) and is
    cropped to ``length`` (default ``T * hop_length``). Raises
    NumericalError when the squared-window overlap-add is too small to
    divide by anywhere in the requested range.
    """
    _validate_frame_params(n_fft, hop_length, win_length)
    spec = np.asarray(spec)
    if spec.ndim != 2 or spec.shape[1] != n_fft // 2 + 1:
        raise ShapeError(
            f"istft expects (T, {n_fft // 2 + 1}) spectrogram, got {spec.shape}"
        )
    frames_total = spec.shape[0]
    if frames_total < 1:
        raise InvalidArgument("istft needs at least one frame")
    if length is None:
        length = frames_total * hop_length
    if length < 0:
        raise InvalidArgument(f"length must be >= 0, got {length}")
    start = n_fft // 2
    full_len = n_fft + hop_length * (frames_total - 1)
    if start + length > full_len:
        raise InvalidArgument(
            f"requested length {length} exceeds the {full_len - start} samples "
            f"covered by {frames_total} frames"
        )

    window = _padded_window(n_fft, win_length)
    frames = irfft(spec, n_fft) * window
    out = np.zeros(full_len)
    wsum = np.zeros(full_len)
    wsq = window * window
    for t in range(frames_total):
        pos = t * hop_length
        out[pos : pos + n_fft] += frames[t]
        wsum[pos : pos + n_fft] += wsq
    region = slice(start, start + length)
    norm = wsum[region]
    if np.any(norm < _WINDOW_SUM_FLOOR):
        raise NumericalError(
            "squared-window overlap-add vanishes inside the output range; "
            "this n_fft/hop/win combination cannot be inverted"
        )
    return out[region] / norm


def linear_magnitude(x: np.ndarray) -> np.ndarray:
    """Magnitude spectrogram at the analysis settings the model was trained
    with (n_fft 1280, hop 320, full-size Hann). Shape (T, 641)."""
    return np.abs(stft(x, N_FFT, HOP_LENGTH, WIN_LENGTH))
