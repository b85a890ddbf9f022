"""Analysis networks: frame encoders that emit Gaussian parameters, and the
utterance-level speaker encoder.

Frame matrices arrive row-per-frame, (T, dim), matching the file formats;
internally everything runs channel-major (channels, T), which is also how
results are returned since that is what the flow and decoder consume.
"""

import numpy as np

from quickvc.errors import InvalidArgument, ShapeError
from quickvc.nn.ops import conv1d, lstm_forward, wn_stack
from quickvc.nn.weights import ModelWeights


class GaussianEncoder:
    """1x1 pre-conv, gated dilated stack, 1x1 projection split into
    (mean, log_std). The content flavor is unconditioned; the spectrogram
    flavor takes the speaker embedding as global conditioning."""

    def __init__(self, weights: ModelWeights, prefix: str, in_dim: int, conditioned: bool):
        cfg = weights.config
        self.in_dim = in_dim
        self.latent = cfg.latent_channels
        self.n_layers = cfg.posterior_layers
        self.conditioned = conditioned
        self.pre_w = weights.get(f"{prefix}.pre.weight")
        self.pre_b = weights.get(f"{prefix}.pre.bias")
        self.in_weights = [
            weights.get(f"{prefix}.wn.in_layers.{i}.weight") for i in range(self.n_layers)
        ]
        self.in_biases = [
            weights.get(f"{prefix}.wn.in_layers.{i}.bias") for i in range(self.n_layers)
        ]
        self.res_skip_weights = [
            weights.get(f"{prefix}.wn.res_skip_layers.{i}.weight")
            for i in range(self.n_layers)
        ]
        self.res_skip_biases = [
            weights.get(f"{prefix}.wn.res_skip_layers.{i}.bias")
            for i in range(self.n_layers)
        ]
        self.cond_w = weights.get(f"{prefix}.wn.cond.weight") if conditioned else None
        self.cond_b = weights.get(f"{prefix}.wn.cond.bias") if conditioned else None
        self.proj_w = weights.get(f"{prefix}.proj.weight")
        self.proj_b = weights.get(f"{prefix}.proj.bias")

    def __call__(self, frames: np.ndarray, g: np.ndarray | None = None):
        """(T, in_dim) frames -> (mean, log_std), each (latent, T)."""
        frames = np.asarray(frames, dtype=np.float64)
        if frames.ndim != 2 or frames.shape[1] != self.in_dim:
            raise ShapeError(
                f"encoder expects (T, {self.in_dim}) frames, got {frames.shape}"
            )
        if frames.shape[0] < 1:
            raise InvalidArgument("encoder needs at least one frame")
        if self.conditioned and g is None:
            raise InvalidArgument("this encoder requires a speaker embedding")
        x = conv1d(frames.T, self.pre_w, self.pre_b)
        x = wn_stack(
            x,
            g,
            in_weights=self.in_weights,
            in_biases=self.in_biases,
            res_skip_weights=self.res_skip_weights,
            res_skip_biases=self.res_skip_biases,
            cond_weight=self.cond_w,
            cond_bias=self.cond_b,
        )
        stats = conv1d(x, self.proj_w, self.proj_b)
        return stats[: self.latent], stats[self.latent :]


def reparam_sample(
    mean: np.ndarray,
    log_std: np.ndarray,
    rng: np.random.Generator,
    scale: float = 1.0,
) -> np.ndarray:
    """Draw ``mean + exp(log_std) * eps * scale`` with eps ~ N(0, 1)."""
    if mean.shape != log_std.shape:
        raise ShapeError(f"mean {mean.shape} and log_std {log_std.shape} differ")
    return mean + np.exp(log_std) * rng.standard_normal(mean.shape) * scale


class SpeakerEncoder:
    """Log-mel frames -> LSTM -> linear head on the last hidden state,
    optionally L2-normalized. Produces one embedding per utterance."""

    def __init__(self, weights: ModelWeights):
        cfg = weights.config
        self.mel_bands = cfg.mel_bands
        self.normalize = cfg.speaker_embedding_normalized
        self.w_ih = weights.get("speaker_encoder.lstm.weight_ih")
        self.w_hh = weights.get("speaker_encoder.lstm.weight_hh")
        self.b_ih = weights.get("speaker_encoder.lstm.bias_ih")
        self.b_hh = weights.get("speaker_encoder.lstm.bias_hh")
        self.proj_w = weights.get("speaker_encoder.proj.weight")
        self.proj_b = weights.get("speaker_encoder.proj.bias")

    def __call__(self, mel: np.ndarray) -> np.ndarray:
        """(T, mel_bands) log-mel -> (embed_dim,) embedding."""
        mel = np.asarray(mel, dtype=np.float64)
        if mel.ndim != 2 or mel.shape[1] != self.mel_bands:
            raise ShapeError(
                f"speaker encoder expects (T, {self.mel_bands}) mel frames, "
                f"got {mel.shape}"
            )
        if mel.shape[0] < 1:
            raise InvalidArgument("speaker encoder needs at least one frame")
        hs = lstm_forward(mel, self.w_ih, self.w_hh, self.b_ih, self.b_hh)
        emb = self.proj_w @ hs[-1] + self.proj_b
        if self.normalize:
            norm = np.linalg.norm(emb)
            if norm == 0.0:
                return emb
            emb = emb / norm
        return emb
