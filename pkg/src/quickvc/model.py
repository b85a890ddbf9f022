"""The assembled converter: encoders, flow and decoder bound to one set of
weights, plus the conversion entry point."""

import numpy as np

from quickvc.decoder import Decoder
from quickvc.dsp.mel import FMAX, FMIN, LOG_FLOOR, mel_filterbank
from quickvc.dsp.stft import stft
from quickvc.encoders import GaussianEncoder, SpeakerEncoder, reparam_sample
from quickvc.errors import InvalidArgument, NumericalError, ShapeError
from quickvc.flow import FlowStack
from quickvc.nn.weights import ModelWeights

DEFAULT_NOISE_SCALE = 0.333
MAX_NOISE_SCALE = 2.0


class VoiceConverter:
    def __init__(self, weights: ModelWeights):
        weights.validate_manifest()
        self.config = weights.config
        self.content_encoder = GaussianEncoder(
            weights, "content_encoder", weights.config.content_dim, conditioned=False
        )
        self.posterior_encoder = GaussianEncoder(
            weights, "posterior_encoder", weights.config.spec_bins, conditioned=True
        )
        self.speaker_encoder = SpeakerEncoder(weights)
        self.flow = FlowStack(weights)
        self.decoder = Decoder(weights)
        cfg = self.config
        self._mel_fb = mel_filterbank(
            cfg.mel_bands, cfg.n_fft, cfg.sample_rate,
            FMIN, min(FMAX, cfg.sample_rate / 2),
        )

    @classmethod
    def from_file(cls, path: str) -> "VoiceConverter":
        return cls(ModelWeights.load(path))

    def mel_frames(self, wave: np.ndarray) -> np.ndarray:
        """Log-mel frames (T, mel_bands) at this model's analysis settings."""
        cfg = self.config
        mag = np.abs(stft(wave, cfg.n_fft, cfg.hop_length, cfg.win_length))
        return np.log(np.maximum(mag @ self._mel_fb.T, LOG_FLOOR))

    def linear_frames(self, wave: np.ndarray) -> np.ndarray:
        """Linear magnitude frames (T, n_fft//2 + 1) at this model's
        analysis settings."""
        cfg = self.config
        return np.abs(stft(wave, cfg.n_fft, cfg.hop_length, cfg.win_length))

    def speaker_embedding(self, reference_wave: np.ndarray) -> np.ndarray:
        """Utterance embedding of a reference waveform, shape (embed_dim,)."""
        reference_wave = np.asarray(reference_wave, dtype=np.float64)
        if reference_wave.ndim != 1:
            raise ShapeError(
                f"reference must be a 1-D waveform, got shape {reference_wave.shape}"
            )
        return self.speaker_encoder(self.mel_frames(reference_wave))

    def convert(
        self,
        features: np.ndarray,
        speaker: np.ndarray,
        noise_scale: float = DEFAULT_NOISE_SCALE,
        seed: int | np.random.Generator = 0,
    ) -> np.ndarray:
        """Synthesize target-voice audio from content features.

        ``features`` is (T, content_dim) at one frame per hop; the output
        is exactly ``hop_length * T`` samples. ``seed`` fixes the prior
        noise draw, making the call fully deterministic.
        """
        features = np.asarray(features, dtype=np.float64)
        cfg = self.config
        if features.ndim != 2 or features.shape[1] != cfg.content_dim:
            raise ShapeError(
                f"expected (T, {cfg.content_dim}) content features, "
                f"got {features.shape}"
            )
        if features.shape[0] < 1:
            raise InvalidArgument("need at least one feature frame")
        if not np.all(np.isfinite(features)):
            raise NumericalError("content features contain non-finite values")
        speaker = np.asarray(speaker, dtype=np.float64)
        if speaker.shape != (cfg.embed_dim,):
            raise ShapeError(
                f"expected ({cfg.embed_dim},) speaker embedding, got {speaker.shape}"
            )
        if not np.all(np.isfinite(speaker)):
            raise NumericalError("speaker embedding contains non-finite values")
        if not np.isfinite(noise_scale) or not 0.0 <= noise_scale <= MAX_NOISE_SCALE:
            raise InvalidArgument(
                f"noise_scale must be in [0, {MAX_NOISE_SCALE}], got {noise_scale}"
            )
        rng = (
            seed
            if isinstance(seed, np.random.Generator)
            else np.random.default_rng(np.uint64(seed))
        )

        mean_p, log_std_p = self.content_encoder(features)
        z_prior = reparam_sample(mean_p, log_std_p, rng, scale=noise_scale)
        g = speaker[:, None]
        z = self.flow.inverse(z_prior, g)
        return self.decoder(z, g)

    def posterior(self, spec_frames: np.ndarray, speaker: np.ndarray):
        """Gaussian posterior parameters for linear-spectrogram frames."""
        return self.posterior_encoder(spec_frames, speaker[:, None])
