"""Model configuration and the QVCW serialized-weights container.

File layout (little-endian throughout):

    bytes 0..3    magic b"QVCW"
    bytes 4..7    u32 format version (currently 1)
    bytes 8..15   u64 header length in bytes
    header        UTF-8 JSON {"config": {...}, "tensors": {name: entry}}
    payload       raw float32 tensor data, concatenated
    trailer       u32 CRC32 of the payload bytes

Each tensor entry is {"dtype": "f32", "shape": [...], "offset": N, "len": M}
with offset in bytes from the payload start and len in elements. Entries
must tile the payload exactly: no gaps, no overlap, nothing dangling.

Loading is strict: every tensor a model needs must be present with the
exact expected shape, and nothing extra may ride along. The expected set
is derived from the config (see expected_tensors), so containers are
self-describing.
"""

import io
import json
import zlib
from dataclasses import dataclass, field, fields

import numpy as np

from quickvc.dsp.multiband import design_synthesis_bank
from quickvc.errors import (
    BadMagicError,
    ChecksumError,
    ConfigError,
    HeaderError,
    TruncatedFileError,
    UnsupportedVersionError,
)

MAGIC = b"QVCW"
FORMAT_VERSION = 1


@dataclass
class ModelConfig:
    """Architecture hyperparameters stored in the container header.

    Defaults reproduce the published architecture; containers may override
    any field, subject to the invariants checked in __post_init__.
    """

    sample_rate: int = 16000
    n_fft: int = 1280
    hop_length: int = 320
    win_length: int = 1280
    mel_bands: int = 80
    content_dim: int = 256
    latent_channels: int = 192
    hidden_channels: int = 192
    embed_dim: int = 256
    wn_kernel: int = 5
    posterior_layers: int = 16
    flow_couplings: int = 4
    flow_wn_layers: int = 4
    mean_only: bool = True
    speaker_lstm_hidden: int = 256
    speaker_embedding_normalized: bool = True
    decoder_base_channels: int = 512
    upsample_scales: tuple = (5, 4)
    upsample_kernels: tuple = (11, 8)
    resblock_kernels: tuple = (3, 7, 11)
    resblock_dilations: tuple = ((1, 3, 5), (1, 3, 5), (1, 3, 5))
    istft_n_fft: int = 16
    istft_hop: int = 4
    subbands: int = 4
    synthesis_taps: int = 63
    lrelu_slope: float = 0.1

    def __post_init__(self):
        for name in (
            "sample_rate", "n_fft", "hop_length", "win_length", "mel_bands",
            "content_dim", "latent_channels", "hidden_channels", "embed_dim",
            "wn_kernel", "posterior_layers", "flow_couplings", "flow_wn_layers",
            "speaker_lstm_hidden", "decoder_base_channels", "istft_n_fft",
            "istft_hop", "subbands", "synthesis_taps",
        ):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ConfigError(f"config field {name} must be a positive integer, got {v!r}")
        self.upsample_scales = tuple(self.upsample_scales)
        self.upsample_kernels = tuple(self.upsample_kernels)
        self.resblock_kernels = tuple(self.resblock_kernels)
        self.resblock_dilations = tuple(tuple(d) for d in self.resblock_dilations)
        if len(self.upsample_scales) != len(self.upsample_kernels):
            raise ConfigError("upsample_scales and upsample_kernels lengths differ")
        if len(self.resblock_kernels) != len(self.resblock_dilations):
            raise ConfigError("resblock_kernels and resblock_dilations lengths differ")
        if self.latent_channels % 2 != 0:
            raise ConfigError("latent_channels must be even (the flow splits them)")
        if self.n_fft % 2 != 0 or self.istft_n_fft % 2 != 0:
            raise ConfigError("FFT sizes must be even")
        if self.synthesis_taps % 2 == 0:
            raise ConfigError("synthesis_taps must be odd (centered filter)")
        for i, (scale, k) in enumerate(zip(self.upsample_scales, self.upsample_kernels)):
            if scale < 1 or k < scale:
                raise ConfigError(
                    f"upsample stage {i}: kernel {k} must be >= scale {scale}"
                )
            if (k - scale) % 2 != 0:
                raise ConfigError(
                    f"upsample stage {i}: kernel {k} and scale {scale} must "
                    f"differ by an even number so padding keeps length exact"
                )
        total = self.istft_hop * self.subbands
        for scale in self.upsample_scales:
            total *= scale
        if total != self.hop_length:
            raise ConfigError(
                f"upsampling chain produces {total} samples per frame but "
                f"hop_length is {self.hop_length}; the product of "
                f"upsample_scales * istft_hop * subbands must equal hop_length"
            )
        mult = self.decoder_base_channels % (1 << len(self.upsample_scales))
        if mult != 0:
            raise ConfigError(
                "decoder_base_channels must be divisible by 2**len(upsample_scales)"
            )

    @property
    def spec_bins(self) -> int:
        return self.n_fft // 2 + 1

    @property
    def head_channels(self) -> int:
        return self.subbands * (self.istft_n_fft + 2)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        if not isinstance(data, dict):
            raise ConfigError(f"config must be a JSON object, got {type(data).__name__}")
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(f"bad config: {exc}") from exc

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = [list(e) if isinstance(e, tuple) else e for e in v]
            out[f.name] = v
        return out


def expected_tensors(cfg: ModelConfig) -> dict:
    """Every tensor name a model built from ``cfg`` reads, with its shape."""
    h = cfg.hidden_channels
    latent = cfg.latent_channels
    gin = cfg.embed_dim
    out = {}

    def wn(prefix, layers, kernel, cond):
        for i in range(layers):
            out[f"{prefix}.in_layers.{i}.weight"] = (2 * h, h, kernel)
            out[f"{prefix}.in_layers.{i}.bias"] = (2 * h,)
            rs = 2 * h if i < layers - 1 else h
            out[f"{prefix}.res_skip_layers.{i}.weight"] = (rs, h, 1)
            out[f"{prefix}.res_skip_layers.{i}.bias"] = (rs,)
        if cond:
            out[f"{prefix}.cond.weight"] = (2 * h * layers, gin, 1)
            out[f"{prefix}.cond.bias"] = (2 * h * layers,)

    def encoder(prefix, in_dim, cond):
        out[f"{prefix}.pre.weight"] = (h, in_dim, 1)
        out[f"{prefix}.pre.bias"] = (h,)
        wn(f"{prefix}.wn", cfg.posterior_layers, cfg.wn_kernel, cond)
        out[f"{prefix}.proj.weight"] = (2 * latent, h, 1)
        out[f"{prefix}.proj.bias"] = (2 * latent,)

    encoder("content_encoder", cfg.content_dim, cond=False)
    encoder("posterior_encoder", cfg.spec_bins, cond=True)

    lstm_h = cfg.speaker_lstm_hidden
    out["speaker_encoder.lstm.weight_ih"] = (4 * lstm_h, cfg.mel_bands)
    out["speaker_encoder.lstm.weight_hh"] = (4 * lstm_h, lstm_h)
    out["speaker_encoder.lstm.bias_ih"] = (4 * lstm_h,)
    out["speaker_encoder.lstm.bias_hh"] = (4 * lstm_h,)
    out["speaker_encoder.proj.weight"] = (gin, lstm_h)
    out["speaker_encoder.proj.bias"] = (gin,)

    half = latent // 2
    post_out = half if cfg.mean_only else latent
    for i in range(cfg.flow_couplings):
        p = f"flow.couplings.{i}"
        out[f"{p}.pre.weight"] = (h, half, 1)
        out[f"{p}.pre.bias"] = (h,)
        wn(f"{p}.wn", cfg.flow_wn_layers, cfg.wn_kernel, cond=True)
        out[f"{p}.post.weight"] = (post_out, h, 1)
        out[f"{p}.post.bias"] = (post_out,)

    base = cfg.decoder_base_channels
    out["decoder.pre.weight"] = (base, latent, 7)
    out["decoder.pre.bias"] = (base,)
    out["decoder.cond.weight"] = (base, gin, 1)
    out["decoder.cond.bias"] = (base,)
    n_kernels = len(cfg.resblock_kernels)
    for i, k_up in enumerate(cfg.upsample_kernels):
        c_in = base >> i
        c_out = base >> (i + 1)
        out[f"decoder.ups.{i}.weight"] = (c_in, c_out, k_up)
        out[f"decoder.ups.{i}.bias"] = (c_out,)
        for j, (k_res, dils) in enumerate(
            zip(cfg.resblock_kernels, cfg.resblock_dilations)
        ):
            p = f"decoder.resblocks.{i * n_kernels + j}"
            for d_idx in range(len(dils)):
                out[f"{p}.convs1.{d_idx}.weight"] = (c_out, c_out, k_res)
                out[f"{p}.convs1.{d_idx}.bias"] = (c_out,)
                out[f"{p}.convs2.{d_idx}.weight"] = (c_out, c_out, k_res)
                out[f"{p}.convs2.{d_idx}.bias"] = (c_out,)
    last = base >> len(cfg.upsample_scales)
    out["decoder.head.weight"] = (cfg.head_channels, last, 7)
    out["decoder.head.bias"] = (cfg.head_channels,)
    out["decoder.synthesis.taps"] = (cfg.subbands, cfg.synthesis_taps)
    return out


class ModelWeights:
    """A config plus named float32 tensors, loadable from / savable to QVCW."""

    def __init__(self, config: ModelConfig, tensors: dict):
        self.config = config
        self.tensors = {}
        for name, arr in tensors.items():
            if not isinstance(name, str) or not name:
                raise ConfigError("tensor names must be non-empty strings")
            self.tensors[name] = np.ascontiguousarray(arr, dtype="<f4")

    def __eq__(self, other):
        if not isinstance(other, ModelWeights):
            return NotImplemented
        if self.config != other.config:
            return False
        if self.tensors.keys() != other.tensors.keys():
            return False
        return all(
            a.shape == other.tensors[n].shape
            and a.tobytes() == other.tensors[n].tobytes()
            for n, a in self.tensors.items()
        )

    def param_count(self) -> int:
        return sum(t.size for t in self.tensors.values())

    def get(self, name: str) -> np.ndarray:
        """Working copy of a tensor, upcast to float64."""
        if name not in self.tensors:
            raise ConfigError(f"model container is missing tensor {name!r}")
        return self.tensors[name].astype(np.float64)

    def validate_manifest(self) -> None:
        """Check the tensor table exactly matches what the config requires."""
        want = expected_tensors(self.config)
        have = {n: t.shape for n, t in self.tensors.items()}
        missing = sorted(set(want) - set(have))
        extra = sorted(set(have) - set(want))
        wrong = sorted(
            n for n in set(want) & set(have) if tuple(have[n]) != tuple(want[n])
        )
        problems = []
        if missing:
            problems.append(f"missing tensors: {missing[:5]}{'...' if len(missing) > 5 else ''}")
        if extra:
            problems.append(f"unexpected tensors: {extra[:5]}{'...' if len(extra) > 5 else ''}")
        if wrong:
            detail = ", ".join(
                f"{n} is {have[n]} want {want[n]}" for n in wrong[:3]
            )
            problems.append(f"wrong shapes: {detail}{'...' if len(wrong) > 3 else ''}")
        if problems:
            raise ConfigError("; ".join(problems))

    def to_bytes(self) -> bytes:
        names = sorted(self.tensors)
        table = {}
        payload = io.BytesIO()
        offset = 0
        for name in names:
            arr = self.tensors[name]
            raw = arr.tobytes()
            table[name] = {
                "dtype": "f32",
                "shape": list(arr.shape),
                "offset": offset,
                "len": int(arr.size),
            }
            payload.write(raw)
            offset += len(raw)
        header = json.dumps(
            {"config": self.config.to_dict(), "tensors": table},
            sort_keys=True,
            separators=(",", ":"),
        ).encode("utf-8")
        payload_bytes = payload.getvalue()
        out = io.BytesIO()
        out.write(MAGIC)
        out.write(FORMAT_VERSION.to_bytes(4, "little"))
        out.write(len(header).to_bytes(8, "little"))
        out.write(header)
        out.write(payload_bytes)
        out.write(zlib.crc32(payload_bytes).to_bytes(4, "little"))
        return out.getvalue()

    def save(self, path: str) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def from_bytes(cls, blob: bytes) -> "ModelWeights":
        if len(blob) < 16:
            raise TruncatedFileError(
                f"container is {len(blob)} bytes; even the fixed header needs 16"
            )
        if blob[:4] != MAGIC:
            raise BadMagicError(
                f"not a QVCW container (magic {blob[:4]!r})"
            )
        version = int.from_bytes(blob[4:8], "little")
        if version != FORMAT_VERSION:
            raise UnsupportedVersionError(
                f"container version {version}; this engine reads version {FORMAT_VERSION}"
            )
        header_len = int.from_bytes(blob[8:16], "little")
        if 16 + header_len > len(blob):
            raise TruncatedFileError(
                f"declared header length {header_len} runs past end of file"
            )
        try:
            header = json.loads(blob[16 : 16 + header_len].decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise HeaderError(f"header is not valid UTF-8 JSON: {exc}") from exc
        if not isinstance(header, dict) or "config" not in header or "tensors" not in header:
            raise HeaderError('header must be an object with "config" and "tensors"')
        table = header["tensors"]
        if not isinstance(table, dict):
            raise HeaderError("tensor table must be an object")

        entries = []
        for name, entry in table.items():
            if not isinstance(entry, dict):
                raise HeaderError(f"tensor {name!r}: entry must be an object")
            try:
                dtype = entry["dtype"]
                shape = entry["shape"]
                off = entry["offset"]
                length = entry["len"]
            except KeyError as exc:
                raise HeaderError(f"tensor {name!r}: missing field {exc}") from exc
            if dtype != "f32":
                raise HeaderError(f"tensor {name!r}: unsupported dtype {dtype!r}")
            if (
                not isinstance(shape, list)
                or not all(isinstance(d, int) and d >= 0 for d in shape)
                or not isinstance(off, int)
                or not isinstance(length, int)
                or off < 0
                or length < 0
            ):
                raise HeaderError(f"tensor {name!r}: malformed shape/offset/len")
            n = 1
            for d in shape:
                n *= d
            if n != length:
                raise HeaderError(
                    f"tensor {name!r}: shape {shape} has {n} elements, len says {length}"
                )
            if off % 4 != 0:
                raise HeaderError(f"tensor {name!r}: offset {off} not 4-byte aligned")
            entries.append((off, length * 4, name, shape))

        entries.sort()
        pos = 0
        for off, nbytes, name, _ in entries:
            if off != pos:
                raise HeaderError(
                    f"tensor table does not tile the payload: tensor {name!r} "
                    f"at offset {off}, expected {pos}"
                )
            pos += nbytes
        payload_len = pos
        want_total = 16 + header_len + payload_len + 4
        if len(blob) < want_total:
            raise TruncatedFileError(
                f"file is {len(blob)} bytes but header + payload + checksum "
                f"need {want_total}"
            )
        if len(blob) > want_total:
            raise HeaderError(f"{len(blob) - want_total} trailing bytes after checksum")
        payload = blob[16 + header_len : 16 + header_len + payload_len]
        stored_crc = int.from_bytes(blob[want_total - 4 : want_total], "little")
        actual_crc = zlib.crc32(payload)
        if stored_crc != actual_crc:
            raise ChecksumError(
                f"payload checksum {actual_crc:#010x} != stored {stored_crc:#010x}"
            )

        config = ModelConfig.from_dict(header["config"])
        tensors = {}
        for off, nbytes, name, shape in entries:
            arr = np.frombuffer(payload, dtype="<f4", count=nbytes // 4, offset=off)
            tensors[name] = arr.reshape(shape)
        return cls(config, tensors)

    @classmethod
    def load(cls, path: str) -> "ModelWeights":
        try:
            with open(path, "rb") as fh:
                blob = fh.read()
        except OSError as exc:
            raise TruncatedFileError(f"cannot read {path}: {exc}") from exc
        return cls.from_bytes(blob)


def random_weights(cfg: ModelConfig, seed: int = 0) -> ModelWeights:
    """A fully wired model with seeded random weights.

    Fan-in-scaled normals keep activations bounded; the flow's output
    projections start at zero (couplings begin as the identity) and the
    recombination filters start from the designed synthesis bank, matching
    how trained models of this family are initialized.
    """
    rng = np.random.default_rng(np.uint64(seed))
    tensors = {}
    for name, shape in expected_tensors(cfg).items():
        if name == "decoder.synthesis.taps":
            tensors[name] = design_synthesis_bank(cfg.subbands, cfg.synthesis_taps - 1)
        elif name.startswith("flow.") and ".post." in name:
            tensors[name] = np.zeros(shape)
        elif name.endswith("bias"):
            tensors[name] = np.zeros(shape)
        else:
            fan_in = 1
            for d in shape[1:]:
                fan_in *= d
            tensors[name] = rng.standard_normal(shape) / np.sqrt(max(fan_in, 1))
    return ModelWeights(cfg, tensors)
