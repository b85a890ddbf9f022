"""Latents to waveform: upsampling stages with multi-receptive-field
residual blocks, a magnitude/phase head, per-sub-band overlap-add
resynthesis, and filtered recombination to the full sample rate.

Per input frame the chain multiplies time by prod(upsample_scales), then
by istft_hop inside each band, then by subbands at recombination; the
model config pins that product to hop_length, so the output is exactly
hop_length samples per latent frame.
"""

import numpy as np

from quickvc.dsp.multiband import fir_filter, zero_insert_upsample
from quickvc.dsp.stft import istft
from quickvc.errors import ShapeError
from quickvc.nn.ops import conv1d, conv_transpose1d, leaky_relu, resblock
from quickvc.nn.weights import ModelWeights

# raw log-magnitudes above this are clamped before exp() so one wild
# activation cannot overflow the overlap-add
LOG_MAG_LIMIT = 10.0


class Decoder:
    def __init__(self, weights: ModelWeights):
        cfg = weights.config
        self.cfg = cfg
        self.latent = cfg.latent_channels
        self.embed_dim = cfg.embed_dim
        self.slope = cfg.lrelu_slope
        self.pre_w = weights.get("decoder.pre.weight")
        self.pre_b = weights.get("decoder.pre.bias")
        self.cond_w = weights.get("decoder.cond.weight")
        self.cond_b = weights.get("decoder.cond.bias")
        self.stages = []
        n_kernels = len(cfg.resblock_kernels)
        for i, (scale, kernel) in enumerate(
            zip(cfg.upsample_scales, cfg.upsample_kernels)
        ):
            blocks = []
            for j, dils in enumerate(cfg.resblock_dilations):
                p = f"decoder.resblocks.{i * n_kernels + j}"
                blocks.append(
                    {
                        "conv1_w": [weights.get(f"{p}.convs1.{d}.weight") for d in range(len(dils))],
                        "conv1_b": [weights.get(f"{p}.convs1.{d}.bias") for d in range(len(dils))],
                        "conv2_w": [weights.get(f"{p}.convs2.{d}.weight") for d in range(len(dils))],
                        "conv2_b": [weights.get(f"{p}.convs2.{d}.bias") for d in range(len(dils))],
                        "dilations": dils,
                    }
                )
            self.stages.append(
                {
                    "scale": scale,
                    "padding": (kernel - scale) // 2,
                    "weight": weights.get(f"decoder.ups.{i}.weight"),
                    "bias": weights.get(f"decoder.ups.{i}.bias"),
                    "blocks": blocks,
                }
            )
        self.head_w = weights.get("decoder.head.weight")
        self.head_b = weights.get("decoder.head.bias")
        self.synthesis_taps = weights.get("decoder.synthesis.taps")

    def __call__(self, z: np.ndarray, g: np.ndarray) -> np.ndarray:
        """(latent, T) latents + (embed_dim, 1) speaker column -> (hop * T,)
        waveform."""
        z = np.asarray(z, dtype=np.float64)
        if z.ndim != 2 or z.shape[0] != self.latent:
            raise ShapeError(f"decoder expects ({self.latent}, T) latents, got {z.shape}")
        g = np.asarray(g, dtype=np.float64)
        if g.shape != (self.embed_dim, 1):
            raise ShapeError(
                f"decoder expects ({self.embed_dim}, 1) speaker column, got {g.shape}"
            )
        cfg = self.cfg
        x = conv1d(z, self.pre_w, self.pre_b, padding=3)
        x = x + conv1d(g, self.cond_w, self.cond_b)
        for stage in self.stages:
            x = leaky_relu(x, self.slope)
            x = conv_transpose1d(
                x, stage["weight"], stage["bias"],
                stride=stage["scale"], padding=stage["padding"],
            )
            acc = None
            for blk in stage["blocks"]:
                y = resblock(
                    x,
                    blk["conv1_w"], blk["conv1_b"],
                    blk["conv2_w"], blk["conv2_b"],
                    blk["dilations"], self.slope,
                )
                acc = y if acc is None else acc + y
            x = acc / len(stage["blocks"])
        x = leaky_relu(x, self.slope)
        # one extra frame on the left so the overlap-add covers T*hop samples
        x = np.concatenate([x[:, 1:2], x], axis=1)
        head = conv1d(x, self.head_w, self.head_b, padding=3)

        bands = cfg.subbands
        bins = cfg.istft_n_fft // 2 + 1
        frames = head.shape[1]
        head = head.reshape(bands, cfg.istft_n_fft + 2, frames)
        log_mag = np.minimum(head[:, :bins], LOG_MAG_LIMIT)
        phase = head[:, bins:]
        spectra = np.exp(log_mag) * np.exp(1j * phase)

        band_len = (frames - 1) * cfg.istft_hop
        low_rate = np.empty((bands, band_len))
        for b in range(bands):
            low_rate[b] = istft(
                spectra[b].T,
                n_fft=cfg.istft_n_fft,
                hop_length=cfg.istft_hop,
                win_length=cfg.istft_n_fft,
                length=band_len,
            )
        up = zero_insert_upsample(low_rate, bands)
        out = np.zeros(up.shape[1])
        for b in range(bands):
            out += fir_filter(up[b], self.synthesis_taps[b])
        return out
