import numpy as np
import pytest

from quickvc.errors import ShapeError
from quickvc.flow import FlowStack
from quickvc.nn.weights import random_weights

from oracles import finite_difference_jacobian_logdet
from conftest import make_small_config

RNG = np.random.default_rng(0xF10)


def _activated_flow(cfg, seed=21, post_scale=0.5):
    """Random weights with non-zero coupling outputs (the default init
    zeroes them, making the flow the identity)."""
    w = random_weights(cfg, seed=seed)
    rng = np.random.default_rng(seed + 1)
    for name in list(w.tensors):
        if name.startswith("flow.") and ".post." in name:
            w.tensors[name] = (
                rng.standard_normal(w.tensors[name].shape) * post_scale
            ).astype(np.float32)
    return w


def test_default_init_is_identity_with_zero_logdet():
    cfg = make_small_config()
    flow = FlowStack(random_weights(cfg, seed=3))
    z = RNG.standard_normal((cfg.latent_channels, 6))
    g = RNG.standard_normal((cfg.embed_dim, 1))
    out, logdet = flow.forward(z, g)
    # couplings are identity; only the channel flips act, and they cancel
    # nothing: the composition is a permutation of the input
    assert logdet == 0.0
    assert sorted(map(tuple, out)) == sorted(map(tuple, z))


def test_roundtrip_mean_only():
    cfg = make_small_config()
    flow = FlowStack(_activated_flow(cfg))
    z = RNG.standard_normal((cfg.latent_channels, 11))
    g = RNG.standard_normal((cfg.embed_dim, 1))
    fwd, logdet = flow.forward(z, g)
    assert logdet == 0.0
    assert not np.allclose(fwd, z)
    back = flow.inverse(fwd, g)
    assert np.max(np.abs(back - z)) < 1e-12


def test_roundtrip_with_scales():
    cfg = make_small_config(mean_only=False)
    flow = FlowStack(_activated_flow(cfg, post_scale=1.5))
    z = RNG.standard_normal((cfg.latent_channels, 9))
    g = RNG.standard_normal((cfg.embed_dim, 1))
    fwd, logdet = flow.forward(z, g)
    assert logdet != 0.0
    back = flow.inverse(fwd, g)
    assert np.max(np.abs(back - z)) < 1e-9


def test_logdet_matches_finite_differences():
    cfg = make_small_config(mean_only=False, latent_channels=4, flow_couplings=2)
    flow = FlowStack(_activated_flow(cfg, seed=5, post_scale=0.8))
    g = RNG.standard_normal((cfg.embed_dim, 1))
    z = RNG.standard_normal((4, 3))
    _, logdet = flow.forward(z, g)
    fd = finite_difference_jacobian_logdet(
        lambda zz: flow.forward(zz, g)[0], z, eps=1e-6
    )
    assert logdet == pytest.approx(fd, abs=1e-5)


def test_conditioning_matters():
    cfg = make_small_config()
    flow = FlowStack(_activated_flow(cfg))
    z = RNG.standard_normal((cfg.latent_channels, 5))
    g1 = RNG.standard_normal((cfg.embed_dim, 1))
    g2 = RNG.standard_normal((cfg.embed_dim, 1))
    out1, _ = flow.forward(z, g1)
    out2, _ = flow.forward(z, g2)
    assert not np.allclose(out1, out2)
    # inverting with the wrong speaker does not recover the input
    assert not np.allclose(flow.inverse(out1, g2), z)


def test_flow_shape_validation():
    cfg = make_small_config()
    flow = FlowStack(random_weights(cfg, seed=1))
    g = RNG.standard_normal((cfg.embed_dim, 1))
    with pytest.raises(ShapeError):
        flow.forward(RNG.standard_normal((cfg.latent_channels + 2, 5)), g)
    with pytest.raises(ShapeError):
        flow.inverse(RNG.standard_normal(cfg.latent_channels), g)
