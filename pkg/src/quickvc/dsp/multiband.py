"""Sub-band recombination pieces: zero-insertion upsampling, centered FIR
filtering, and a cosine-modulated synthesis filter prototype.

The decoder produces ``subbands`` low-rate streams; recombination
zero-inserts each up to the full rate (with a gain of ``factor`` so band
energy is preserved), applies that band's synthesis filter, and sums.
"""

import numpy as np

from quickvc.errors import InvalidArgument, ShapeError

__all__ = ["zero_insert_upsample", "fir_filter", "design_synthesis_bank"]


def zero_insert_upsample(x: np.ndarray, factor: int) -> np.ndarray:
    """Insert ``factor - 1`` zeros between samples along the last axis.

    ``out[..., k * factor] = x[..., k] * factor``; everything else is zero.
    The gain compensates the energy spread across the inserted images, so
    an ideal low-pass afterwards restores the original DC level.
    """
    if not isinstance(factor, (int, np.integer)) or factor < 1:
        raise InvalidArgument(f"factor must be a positive integer, got {factor!r}")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0:
        raise ShapeError("zero_insert_upsample expects at least 1-D input")
    out = np.zeros(x.shape[:-1] + (x.shape[-1] * factor,))
    out[..., ::factor] = x * factor
    return out


def fir_filter(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Centered true convolution along the last axis, output length preserved.

    True convolution, not cross-correlation: the tap vector is flipped, and
    the middle tap (index ``len(taps) // 2``) aligns with the current
    sample. An impulse therefore copies the taps out in order:
    ``fir_filter([0, 0, 1, 0, 0], [1, 2, 3]) == [0, 1, 2, 3, 0]``.
    """
    x = np.asarray(x, dtype=np.float64)
    taps = np.asarray(taps, dtype=np.float64)
    if taps.ndim != 1 or taps.size == 0:
        raise ShapeError(f"taps must be a non-empty 1-D array, got shape {taps.shape}")
    if taps.size % 2 == 0:
        raise InvalidArgument(
            f"taps length must be odd for a centered filter, got {taps.size}"
        )
    if x.ndim == 0:
        raise ShapeError("fir_filter expects at least 1-D input")
    if x.shape[-1] < taps.size:
        raise InvalidArgument(
            f"signal length {x.shape[-1]} is shorter than the {taps.size}-tap filter"
        )
    flat = x.reshape(-1, x.shape[-1])
    out = np.empty_like(flat)
    for i, row in enumerate(flat):
        out[i] = np.convolve(row, taps, mode="same")
    return out.reshape(x.shape)


def design_synthesis_bank(
    subbands: int = 4,
    num_taps: int = 62,
    cutoff_ratio: float = 0.142,
    beta: float = 9.0,
) -> np.ndarray:
    """Cosine-modulated synthesis filters, shape (subbands, num_taps + 1).

    A Kaiser-windowed sinc prototype (cutoff as a fraction of the full
    band) is modulated onto each sub-band center with the quadrature phase
    offsets that make the bank's aliasing terms cancel against the matching
    analysis bank. Used to initialize the recombination filters of randomly
    generated models; trained models ship their own taps.
    """
    if subbands < 1:
        raise InvalidArgument(f"subbands must be >= 1, got {subbands}")
    if num_taps < 2 or num_taps % 2 != 0:
        raise InvalidArgument(
            f"num_taps must be even and >= 2 (filter length odd), got {num_taps}"
        )
    if not 0.0 < cutoff_ratio < 1.0:
        raise InvalidArgument(f"cutoff_ratio must be in (0, 1), got {cutoff_ratio}")

    n = np.arange(num_taps + 1, dtype=np.float64)
    centered = n - 0.5 * num_taps
    omega = np.pi * cutoff_ratio
    with np.errstate(invalid="ignore"):
        proto = np.sin(omega * centered) / (np.pi * centered)
    proto[num_taps // 2] = cutoff_ratio
    proto *= np.kaiser(num_taps + 1, beta)

    bank = np.zeros((subbands, num_taps + 1))
    for k in range(subbands):
        bank[k] = 2.0 * proto * np.cos(
            (2 * k + 1) * (np.pi / (2 * subbands)) * centered
            - ((-1) ** k) * np.pi / 4.0
        )
    return bank
