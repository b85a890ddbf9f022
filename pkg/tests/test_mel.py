import numpy as np
import pytest

from quickvc.dsp import mel_filterbank, mel_spectrogram, sr_resize
from quickvc.dsp.mel import LOG_FLOOR, _hz_to_mel, _mel_to_hz
from quickvc.errors import InvalidArgument, ShapeError

RNG = np.random.default_rng(0x3E1)


def test_scale_breakpoints():
    # linear region: 1 kHz sits at 15 on the mel axis; 27 log steps above
    # that is one factor of 6.4 in frequency
    assert _hz_to_mel(1000.0) == pytest.approx(15.0)
    assert _mel_to_hz(15.0 + 27.0) == pytest.approx(6400.0)
    assert _hz_to_mel(200.0 / 3.0) == pytest.approx(1.0)


def test_scale_roundtrip():
    hz = np.linspace(0, 8000, 257)
    np.testing.assert_allclose(_mel_to_hz(_hz_to_mel(hz)), hz, atol=1e-9)


def test_filterbank_shape_and_support():
    fb = mel_filterbank()
    assert fb.shape == (80, 641)
    assert np.all(fb >= 0)
    assert np.all(fb.sum(axis=1) > 0)


def test_filterbank_rows_are_unimodal_with_rising_centers():
    fb = mel_filterbank()
    centers = fb.argmax(axis=1)
    assert np.all(np.diff(centers) >= 1)
    for row in fb[:, :]:
        peak = row.argmax()
        assert np.all(np.diff(row[: peak + 1]) >= -1e-12)
        assert np.all(np.diff(row[peak:]) <= 1e-12)


def test_filterbank_band_area_is_normalized():
    # 2/(hi-lo) scaling gives unit continuous-frequency area; discretely
    # that is 1/bin_width once the triangle spans a few bins
    fb = mel_filterbank()
    bin_width = 16000 / 1280
    areas = fb.sum(axis=1) * bin_width
    np.testing.assert_allclose(areas[40:], 1.0, rtol=0.05)


def test_filterbank_validates_frequency_range():
    with pytest.raises(InvalidArgument):
        mel_filterbank(fmin=4000, fmax=2000)
    with pytest.raises(InvalidArgument):
        mel_filterbank(fmax=9000)


def test_mel_spectrogram_shape():
    m = mel_spectrogram(RNG.standard_normal(16000))
    assert m.shape == (51, 80)


def test_mel_spectrogram_silence_hits_log_floor_exactly():
    m = mel_spectrogram(np.zeros(16000))
    np.testing.assert_array_equal(m, np.log(LOG_FLOOR))


def test_mel_spectrogram_monotone_in_amplitude():
    x = RNG.standard_normal(8000)
    a = mel_spectrogram(x)
    b = mel_spectrogram(2 * x)
    assert np.all(b >= a - 1e-12)


def test_sr_resize_identity_is_exact():
    m = RNG.standard_normal((7, 80))
    out = sr_resize(m, 1.0)
    np.testing.assert_array_equal(out, m)
    assert out is not m


def test_sr_resize_linear_ramp_closed_form():
    ramp = np.tile(np.arange(80.0), (3, 1))
    np.testing.assert_allclose(sr_resize(ramp, 2.0), ramp / 2.0, atol=1e-12)


def test_sr_resize_fills_out_of_range_with_floor():
    ramp = np.tile(np.arange(80.0), (2, 1))
    out = sr_resize(ramp, 0.5)
    # source position 2*b runs off the top half
    valid = np.arange(80) * 2 <= 79
    np.testing.assert_allclose(out[:, valid], ramp[:, valid] * 2.0, atol=1e-12)
    np.testing.assert_array_equal(out[:, ~valid], np.log(LOG_FLOOR))


def test_sr_resize_validates_input():
    with pytest.raises(ShapeError):
        sr_resize(np.zeros(80), 1.0)
    for bad in (0.0, -1.0, np.nan, np.inf):
        with pytest.raises(InvalidArgument):
            sr_resize(np.zeros((2, 80)), bad)
