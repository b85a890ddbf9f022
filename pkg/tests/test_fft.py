import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quickvc.dsp import fft, ifft, irfft, rfft
from quickvc.errors import InvalidArgument

from oracles import naive_dft, naive_idft

RNG = np.random.default_rng(0xF0F0)


@pytest.mark.parametrize("n", [1, 2, 4, 8, 16, 64, 256, 1024, 1280, 4096])
def test_fft_matches_naive_dft(n):
    x = RNG.standard_normal(n) + 1j * RNG.standard_normal(n)
    got = fft(x)
    want = naive_dft(x)
    np.testing.assert_allclose(got, want, rtol=0, atol=1e-9 * max(1, n))


@pytest.mark.parametrize("n", [3, 5, 6, 7, 12, 100, 320, 641, 1000, 1279])
def test_fft_non_pow2_matches_naive_dft(n):
    x = RNG.standard_normal(n) + 1j * RNG.standard_normal(n)
    np.testing.assert_allclose(fft(x), naive_dft(x), rtol=0, atol=1e-9 * max(1, n))


def test_fft_batched_equals_per_row():
    x = RNG.standard_normal((7, 320)) + 1j * RNG.standard_normal((7, 320))
    batch = fft(x)
    rows = np.stack([fft(r) for r in x])
    np.testing.assert_array_equal(batch, rows)


def test_fft_preserves_leading_shape():
    x = RNG.standard_normal((2, 3, 64))
    assert fft(x).shape == (2, 3, 64)


@given(st.integers(min_value=1, max_value=200))
@settings(max_examples=40, deadline=None)
def test_ifft_inverts_fft(n):
    x = RNG.standard_normal(n) + 1j * RNG.standard_normal(n)
    np.testing.assert_allclose(ifft(fft(x)), x, rtol=0, atol=1e-9)


def test_ifft_matches_naive_idft():
    x = RNG.standard_normal(100) + 1j * RNG.standard_normal(100)
    np.testing.assert_allclose(ifft(x), naive_idft(x), rtol=0, atol=1e-10)


def test_parseval_energy():
    x = RNG.standard_normal(1280)
    spec = fft(x)
    np.testing.assert_allclose(
        np.sum(np.abs(spec) ** 2) / 1280, np.sum(x**2), rtol=1e-10
    )


def test_rfft_bin_count_and_real_edges():
    x = RNG.standard_normal(1280)
    spec = rfft(x)
    assert spec.shape == (641,)
    assert spec[0].imag == 0.0
    assert spec[-1].imag == 0.0
    np.testing.assert_allclose(spec, naive_dft(x)[:641], rtol=0, atol=1e-8)


def test_rfft_rejects_complex():
    with pytest.raises(InvalidArgument):
        rfft(np.array([1 + 1j, 2.0]))


def test_irfft_roundtrip():
    x = RNG.standard_normal((5, 1280))
    np.testing.assert_allclose(irfft(rfft(x), 1280), x, rtol=0, atol=1e-9)


def test_irfft_validates_bin_count():
    with pytest.raises(InvalidArgument):
        irfft(np.zeros(640, dtype=np.complex128), 1280)


def test_fft_impulse_is_flat():
    x = np.zeros(256)
    x[0] = 1.0
    np.testing.assert_allclose(fft(x), np.ones(256, dtype=np.complex128), atol=1e-12)


def test_fft_rejects_empty():
    with pytest.raises(InvalidArgument):
        fft(np.zeros((3, 0)))
