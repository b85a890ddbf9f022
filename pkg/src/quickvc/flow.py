"""Speaker-conditioned normalizing flow between the posterior latent space
and the prior latent space.

A stack of affine coupling layers, each followed by a channel flip so both
halves get transformed over depth. Couplings are mean-only by default
(pure shifts, unit Jacobian); when a model carries scales too, the
log-scales are clamped to +-10 before use as a numeric guard.
"""

import numpy as np

from quickvc.errors import ShapeError
from quickvc.nn.ops import conv1d, wn_stack
from quickvc.nn.weights import ModelWeights

LOG_SCALE_LIMIT = 10.0


class CouplingLayer:
    """Affine coupling: the first half of the channels parameterizes a
    (shift, scale) transform of the second half."""

    def __init__(self, weights: ModelWeights, index: int):
        cfg = weights.config
        self.half = cfg.latent_channels // 2
        self.mean_only = cfg.mean_only
        self.n_layers = cfg.flow_wn_layers
        p = f"flow.couplings.{index}"
        self.pre_w = weights.get(f"{p}.pre.weight")
        self.pre_b = weights.get(f"{p}.pre.bias")
        self.in_weights = [
            weights.get(f"{p}.wn.in_layers.{i}.weight") for i in range(self.n_layers)
        ]
        self.in_biases = [
            weights.get(f"{p}.wn.in_layers.{i}.bias") for i in range(self.n_layers)
        ]
        self.res_skip_weights = [
            weights.get(f"{p}.wn.res_skip_layers.{i}.weight")
            for i in range(self.n_layers)
        ]
        self.res_skip_biases = [
            weights.get(f"{p}.wn.res_skip_layers.{i}.bias")
            for i in range(self.n_layers)
        ]
        self.cond_w = weights.get(f"{p}.wn.cond.weight")
        self.cond_b = weights.get(f"{p}.wn.cond.bias")
        self.post_w = weights.get(f"{p}.post.weight")
        self.post_b = weights.get(f"{p}.post.bias")

    def _stats(self, z0: np.ndarray, g: np.ndarray):
        h = conv1d(z0, self.pre_w, self.pre_b)
        h = wn_stack(
            h,
            g,
            in_weights=self.in_weights,
            in_biases=self.in_biases,
            res_skip_weights=self.res_skip_weights,
            res_skip_biases=self.res_skip_biases,
            cond_weight=self.cond_w,
            cond_bias=self.cond_b,
        )
        stats = conv1d(h, self.post_w, self.post_b)
        if self.mean_only:
            return stats, np.zeros_like(stats)
        mean = stats[: self.half]
        log_scale = np.clip(stats[self.half :], -LOG_SCALE_LIMIT, LOG_SCALE_LIMIT)
        return mean, log_scale

    def forward(self, z: np.ndarray, g: np.ndarray):
        z0, z1 = z[: self.half], z[self.half :]
        mean, log_scale = self._stats(z0, g)
        z1 = mean + z1 * np.exp(log_scale)
        return np.concatenate([z0, z1]), float(np.sum(log_scale))

    def inverse(self, z: np.ndarray, g: np.ndarray):
        z0, z1 = z[: self.half], z[self.half :]
        mean, log_scale = self._stats(z0, g)
        z1 = (z1 - mean) * np.exp(-log_scale)
        return np.concatenate([z0, z1])


class FlowStack:
    """Couplings interleaved with channel flips; forward maps posterior
    latents toward the prior and reports the total log-determinant."""

    def __init__(self, weights: ModelWeights):
        cfg = weights.config
        self.latent = cfg.latent_channels
        self.couplings = [
            CouplingLayer(weights, i) for i in range(cfg.flow_couplings)
        ]

    def _check(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        if z.ndim != 2 or z.shape[0] != self.latent:
            raise ShapeError(f"flow expects ({self.latent}, T) latents, got {z.shape}")
        return z

    def forward(self, z: np.ndarray, g: np.ndarray):
        z = self._check(z)
        logdet = 0.0
        for coupling in self.couplings:
            z, ld = coupling.forward(z, g)
            logdet += ld
            z = z[::-1]
        return z, logdet

    def inverse(self, z: np.ndarray, g: np.ndarray) -> np.ndarray:
        z = self._check(z)
        for coupling in reversed(self.couplings):
            z = z[::-1]
            z = coupling.inverse(z, g)
        return z
