"""Fourier transforms for the spectrogram code.

Implemented in-repo: an iterative radix-2 transform for power-of-two sizes
and a Bluestein chirp-z fallback for every other length. Both are vectorized
over a leading batch axis and share a plan cache, so repeated calls at one
size (the STFT hot path) pay the setup cost once.

Conventions match the usual DFT definition: forward kernel ``exp(-2j*pi*n*k/N)``
with no normalization, inverse scaled by ``1/N``.
"""

from functools import lru_cache

import numpy as np

from quickvc.errors import InvalidArgument

__all__ = ["fft", "ifft", "rfft", "irfft"]


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@lru_cache(maxsize=None)
def _pow2_plan(n: int):
    """Bit-reversal permutation and per-stage twiddle tables for size n."""
    levels = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for _ in range(levels):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    twiddles = []
    m = 2
    while m <= n:
        twiddles.append(np.exp(-2j * np.pi * np.arange(m // 2) / m))
        m *= 2
    return rev, tuple(twiddles)


@lru_cache(maxsize=None)
def _bluestein_plan(n: int):
    """Chirp sequence and padded-chirp spectrum for arbitrary size n."""
    m = 1 << (2 * n - 1).bit_length()
    k = np.arange(n, dtype=np.int64)
    # k**2 mod 2n keeps the phase argument small and exact for any size.
    chirp = np.exp(-1j * np.pi * ((k * k) % (2 * n)) / n)
    b = np.zeros(m, dtype=np.complex128)
    b[:n] = chirp.conj()
    b[m - n + 1 :] = chirp[1:][::-1].conj()
    fb = _fft_pow2(b[np.newaxis, :])[0]
    return m, chirp, fb


def _fft_pow2(x: np.ndarray) -> np.ndarray:
    """Iterative radix-2 transform of a (batch, n) complex array."""
    n = x.shape[-1]
    if n == 1:
        return x.copy()
    rev, twiddles = _pow2_plan(n)
    y = np.ascontiguousarray(x[:, rev])
    m = 2
    for tw in twiddles:
        y = y.reshape(y.shape[0], n // m, m)
        t = y[:, :, m // 2 :] * tw
        y[:, :, m // 2 :] = y[:, :, : m // 2] - t
        y[:, :, : m // 2] += t
        m *= 2
    return y.reshape(-1, n)


def _fft_bluestein(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    m, chirp, fb = _bluestein_plan(n)
    a = np.zeros((x.shape[0], m), dtype=np.complex128)
    a[:, :n] = x * chirp
    conv = _ifft_pow2(_fft_pow2(a) * fb)
    return conv[:, :n] * chirp


def _ifft_pow2(x: np.ndarray) -> np.ndarray:
    return _fft_pow2(x.conj()).conj() / x.shape[-1]


def _as_batch(x: np.ndarray):
    x = np.asarray(x)
    if x.ndim == 0 or x.shape[-1] == 0:
        raise InvalidArgument("fft input must have a non-empty last axis")
    lead = x.shape[:-1]
    return x.reshape(-1, x.shape[-1]), lead


def fft(x: np.ndarray) -> np.ndarray:
    """Complex DFT along the last axis. Any length, any leading shape."""
    flat, lead = _as_batch(x)
    flat = flat.astype(np.complex128, copy=False)
    n = flat.shape[-1]
    if n == 1:
        out = flat.copy()
    elif _is_pow2(n):
        out = _fft_pow2(flat)
    else:
        out = _fft_bluestein(flat)
    return out.reshape(*lead, n)


def ifft(x: np.ndarray) -> np.ndarray:
    """Inverse complex DFT along the last axis (1/N normalization)."""
    flat, lead = _as_batch(x)
    flat = flat.astype(np.complex128, copy=False)
    n = flat.shape[-1]
    out = fft(flat.conj()).conj() / n
    return out.reshape(*lead, n)


def rfft(x: np.ndarray) -> np.ndarray:
    """DFT of real input, returning the n//2 + 1 non-redundant bins.

    For real input the DC bin (and the Nyquist bin when n is even) is real
    by symmetry; their imaginary parts are pinned to exactly 0.0 so the
    invariant holds bit-for-bit, not just to rounding.
    """
    x = np.asarray(x)
    if np.iscomplexobj(x):
        raise InvalidArgument("rfft expects real input")
    n = x.shape[-1]
    full = fft(x.astype(np.float64, copy=False))
    out = np.ascontiguousarray(full[..., : n // 2 + 1])
    out[..., 0] = out[..., 0].real
    if n % 2 == 0:
        out[..., -1] = out[..., -1].real
    return out


def irfft(spec: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`rfft` for an even target length ``n``.

    ``spec`` holds the n//2 + 1 non-redundant bins; the negative-frequency
    half is reconstructed by conjugate symmetry and the result is real.
    """
    spec = np.asarray(spec, dtype=np.complex128)
    if n < 2 or n % 2 != 0:
        raise InvalidArgument("irfft target length must be even and >= 2")
    if spec.shape[-1] != n // 2 + 1:
        raise InvalidArgument(
            f"irfft expects {n // 2 + 1} bins for length {n}, got {spec.shape[-1]}"
        )
    full = np.concatenate([spec, spec[..., -2:0:-1].conj()], axis=-1)
    return ifft(full).real
