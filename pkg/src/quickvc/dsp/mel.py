"""Mel-frequency projection and the frequency-axis resize used for
sample-rate augmentation.

The filterbank follows the Slaney construction: linear below 1 kHz,
logarithmic above, triangles normalized to constant energy per band
(2 / bandwidth). Input to the projection is the magnitude spectrogram
(not power), and the output is log-compressed with a 1e-5 floor.
"""

import numpy as np

from quickvc.dsp.stft import SAMPLE_RATE, N_FFT, linear_magnitude
from quickvc.errors import InvalidArgument, ShapeError

N_MELS = 80
FMIN = 0.0
FMAX = 8000.0
LOG_FLOOR = 1e-5

_F_SP = 200.0 / 3.0
_MIN_LOG_HZ = 1000.0
_MIN_LOG_MEL = _MIN_LOG_HZ / _F_SP
_LOG_STEP = np.log(6.4) / 27.0


def _hz_to_mel(hz):
    hz = np.asarray(hz, dtype=np.float64)
    mel = hz / _F_SP
    above = hz >= _MIN_LOG_HZ
    mel = np.where(above, _MIN_LOG_MEL + np.log(np.maximum(hz, 1.0) / _MIN_LOG_HZ) / _LOG_STEP, mel)
    return mel


def _mel_to_hz(mel):
    mel = np.asarray(mel, dtype=np.float64)
    hz = mel * _F_SP
    above = mel >= _MIN_LOG_MEL
    return np.where(above, _MIN_LOG_HZ * np.exp(_LOG_STEP * (mel - _MIN_LOG_MEL)), hz)


def mel_filterbank(
    n_mels: int = N_MELS,
    n_fft: int = N_FFT,
    sample_rate: int = SAMPLE_RATE,
    fmin: float = FMIN,
    fmax: float = FMAX,
) -> np.ndarray:
    """Triangular filterbank matrix, shape (n_mels, n_fft//2 + 1)."""
    if n_mels < 1:
        raise InvalidArgument(f"n_mels must be >= 1, got {n_mels}")
    if not 0 <= fmin < fmax <= sample_rate / 2:
        raise InvalidArgument(
            f"need 0 <= fmin < fmax <= nyquist, got fmin={fmin} fmax={fmax}"
        )
    n_bins = n_fft // 2 + 1
    fft_freqs = np.arange(n_bins) * (sample_rate / n_fft)
    mel_pts = np.linspace(_hz_to_mel(fmin), _hz_to_mel(fmax), n_mels + 2)
    hz_pts = _mel_to_hz(mel_pts)

    fb = np.zeros((n_mels, n_bins))
    for i in range(n_mels):
        lo, center, hi = hz_pts[i], hz_pts[i + 1], hz_pts[i + 2]
        rising = (fft_freqs - lo) / (center - lo)
        falling = (hi - fft_freqs) / (hi - center)
        fb[i] = np.maximum(0.0, np.minimum(rising, falling))
        fb[i] *= 2.0 / (hi - lo)
    return fb


def mel_spectrogram(x: np.ndarray, filterbank: np.ndarray | None = None) -> np.ndarray:
    """Log-mel spectrogram of a 1-D signal, shape (T, n_mels).

    ``log(max(filterbank @ magnitude, 1e-5))`` per frame; the floor keeps
    silent frames finite at log(1e-5).
    """
    if filterbank is None:
        filterbank = _default_filterbank()
    mag = linear_magnitude(x)
    return np.log(np.maximum(mag @ filterbank.T, LOG_FLOOR))


_FILTERBANK_CACHE = None


def _default_filterbank() -> np.ndarray:
    global _FILTERBANK_CACHE
    if _FILTERBANK_CACHE is None:
        _FILTERBANK_CACHE = mel_filterbank()
    return _FILTERBANK_CACHE


def sr_resize(mel: np.ndarray, ratio: float) -> np.ndarray:
    """Stretch the frequency axis of a log-mel spectrogram by ``ratio``.

    Output bin ``b`` samples source position ``b / ratio`` by linear
    interpolation; positions past the top bin are filled with the log
    floor. ``ratio == 1`` returns the input unchanged bit-for-bit. Shape
    is preserved, which is the point: a model consuming (T, n_mels) sees
    spectra as if the audio had been resampled.
    """
    mel = np.asarray(mel, dtype=np.float64)
    if mel.ndim != 2:
        raise ShapeError(f"sr_resize expects (T, n_mels), got shape {mel.shape}")
    if not np.isfinite(ratio) or ratio <= 0:
        raise InvalidArgument(f"ratio must be a positive finite number, got {ratio}")
    if ratio == 1.0:
        return mel.copy()
    n_bins = mel.shape[1]
    pos = np.arange(n_bins) / ratio
    valid = pos <= n_bins - 1
    idx = np.minimum(np.floor(pos).astype(np.intp), n_bins - 2)
    frac = pos - idx
    out = mel[:, idx] * (1.0 - frac) + mel[:, idx + 1] * frac
    out[:, ~valid] = np.log(LOG_FLOOR)
    return out
