import numpy as np
import pytest

from quickvc.decoder import Decoder
from quickvc.errors import ShapeError
from quickvc.nn.weights import random_weights

from conftest import make_small_config

RNG = np.random.default_rng(0xDEC)

CFG = make_small_config()
WEIGHTS = random_weights(CFG, seed=31)


@pytest.mark.parametrize("t_frames", [1, 3, 7])
def test_output_length_is_hop_times_frames(t_frames):
    dec = Decoder(WEIGHTS)
    z = RNG.standard_normal((CFG.latent_channels, t_frames))
    g = RNG.standard_normal((CFG.embed_dim, 1))
    wave = dec(z, g)
    assert wave.shape == (CFG.hop_length * t_frames,)
    assert np.all(np.isfinite(wave))


def test_bit_identical_across_runs(backend_name):
    dec = Decoder(WEIGHTS)
    z = RNG.standard_normal((CFG.latent_channels, 4))
    g = RNG.standard_normal((CFG.embed_dim, 1))
    np.testing.assert_array_equal(dec(z, g), dec(z, g))


def test_backends_produce_matching_waveforms():
    from quickvc import kernels

    if len(kernels.available_backends()) < 2:
        pytest.skip("only one backend importable")
    dec = Decoder(WEIGHTS)
    z = RNG.standard_normal((CFG.latent_channels, 5))
    g = RNG.standard_normal((CFG.embed_dim, 1))
    waves = {}
    for name in kernels.available_backends():
        kernels.set_backend(name)
        waves[name] = dec(z, g)
    kernels.set_backend("auto")
    a, b = waves.values()
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-10)


def test_speaker_conditioning_changes_waveform():
    dec = Decoder(WEIGHTS)
    z = RNG.standard_normal((CFG.latent_channels, 4))
    w1 = dec(z, RNG.standard_normal((CFG.embed_dim, 1)))
    w2 = dec(z, RNG.standard_normal((CFG.embed_dim, 1)))
    assert not np.allclose(w1, w2)


def test_magnitude_clamp_keeps_output_finite():
    w = random_weights(CFG, seed=31)
    w.tensors["decoder.head.bias"] = np.full(
        w.tensors["decoder.head.bias"].shape, 1e4, dtype=np.float32
    )
    dec = Decoder(w)
    wave = dec(
        RNG.standard_normal((CFG.latent_channels, 3)) * 100.0,
        RNG.standard_normal((CFG.embed_dim, 1)),
    )
    assert np.all(np.isfinite(wave))


def test_decoder_validates_shapes():
    dec = Decoder(WEIGHTS)
    g = RNG.standard_normal((CFG.embed_dim, 1))
    with pytest.raises(ShapeError):
        dec(RNG.standard_normal((CFG.latent_channels + 1, 4)), g)
    with pytest.raises(ShapeError):
        dec(RNG.standard_normal((CFG.latent_channels, 4)), g.ravel())
