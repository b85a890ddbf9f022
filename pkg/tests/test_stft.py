import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quickvc.dsp import hann_window, istft, linear_magnitude, stft
from quickvc.errors import InvalidArgument, NumericalError, ShapeError

RNG = np.random.default_rng(0x57F7)


def test_hann_small_values():
    np.testing.assert_array_equal(hann_window(2), [0.0, 1.0])
    np.testing.assert_allclose(hann_window(4), [0.0, 0.5, 1.0, 0.5], atol=1e-15)


def test_hann_is_periodic_not_symmetric():
    w = hann_window(8)
    assert w[0] == 0.0
    # periodic windows are missing the final zero; w[1] != w[-1]
    assert w[1] != w[-1]
    np.testing.assert_allclose(w[1:], w[1:][::-1], atol=1e-15)


def test_hann_rejects_bad_length():
    with pytest.raises(InvalidArgument):
        hann_window(0)
    with pytest.raises(InvalidArgument):
        hann_window(-3)


def test_squared_window_overlap_add_is_constant():
    # 75% overlap: the squared periodic Hann tiles to exactly 3/2.
    n, hop = 64, 16
    w2 = hann_window(n) ** 2
    total = np.zeros(n * 20)
    for t in range((total.size - n) // hop + 1):
        total[t * hop : t * hop + n] += w2
    interior = total[n:-n]
    np.testing.assert_allclose(interior, 1.5, rtol=0, atol=1e-10)


def test_stft_shape_and_frame_count():
    x = RNG.standard_normal(16000)
    spec = stft(x)
    assert spec.shape == (1 + 16000 // 320, 641)
    assert spec.dtype == np.complex128


def test_stft_dc_and_nyquist_bins_are_real():
    spec = stft(RNG.standard_normal(5000))
    assert np.all(spec[:, 0].imag == 0.0)
    assert np.all(spec[:, -1].imag == 0.0)


def test_stft_rejects_empty_and_short():
    with pytest.raises(InvalidArgument):
        stft(np.array([]))
    with pytest.raises(InvalidArgument):
        stft(np.zeros(640))
    with pytest.raises(ShapeError):
        stft(np.zeros((2, 1000)))


def test_stft_tone_peaks_at_expected_bin():
    bin_idx = 100
    freq = bin_idx * 16000 / 1280
    t = np.arange(16000) / 16000
    spec = linear_magnitude(np.sin(2 * np.pi * freq * t))
    assert np.argmax(spec[10]) == bin_idx


def test_roundtrip_white_noise():
    x = RNG.standard_normal(16000)
    y = istft(stft(x), length=16000)
    assert np.max(np.abs(y - x)) < 1e-9


def test_roundtrip_length_not_multiple_of_hop():
    x = RNG.standard_normal(16000 + 123)
    y = istft(stft(x), length=x.size)
    assert y.shape == x.shape
    assert np.max(np.abs(y - x)) < 1e-9


def test_roundtrip_small_config():
    # same geometry as the decoder's per-band resynthesis
    x = RNG.standard_normal(400)
    spec = stft(x, n_fft=16, hop_length=4, win_length=16)
    y = istft(spec, n_fft=16, hop_length=4, win_length=16, length=400)
    assert np.max(np.abs(y - x)) < 1e-10


def test_istft_default_length_is_hop_times_frames():
    spec = stft(RNG.standard_normal(1600), n_fft=64, hop_length=16, win_length=64)
    y = istft(spec, n_fft=64, hop_length=16, win_length=64)
    assert y.size == spec.shape[0] * 16


def test_istft_degenerate_overlap_raises():
    # hop == n_fft leaves zero-valued window samples uncovered
    spec = np.ones((3, 9), dtype=np.complex128)
    with pytest.raises(NumericalError):
        istft(spec, n_fft=16, hop_length=16, win_length=16, length=32)


def test_istft_validates_shape_and_length():
    spec = stft(RNG.standard_normal(1600), n_fft=64, hop_length=16, win_length=64)
    with pytest.raises(ShapeError):
        istft(spec[:, :-1], n_fft=64, hop_length=16, win_length=64)
    with pytest.raises(InvalidArgument):
        istft(spec, n_fft=64, hop_length=16, win_length=64, length=10**9)


def test_linear_magnitude_matches_abs_stft():
    x = RNG.standard_normal(8000)
    np.testing.assert_array_equal(linear_magnitude(x), np.abs(stft(x)))


@given(st.integers(min_value=2000, max_value=4000))
@settings(max_examples=20, deadline=None)
def test_roundtrip_random_lengths(n):
    x = np.random.default_rng(n).standard_normal(n)
    spec = stft(x, n_fft=64, hop_length=16, win_length=64)
    y = istft(spec, n_fft=64, hop_length=16, win_length=64, length=n)
    assert np.max(np.abs(y - x)) < 1e-9
