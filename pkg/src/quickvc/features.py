"""QVCF frame-matrix container: a (T, dim) float32 array with a checksum.

Layout, little-endian:

    bytes 0..3    magic b"QVCF"
    bytes 4..7    u32 format version (currently 1)
    bytes 8..11   u32 frame count T
    bytes 12..15  u32 per-frame dimension
    payload       T * dim float32, row-major
    trailer       u32 CRC32 of the payload bytes

Used for content features (dim 256 at 50 frames/s), but the container
itself is generic: spectrograms and embeddings travel in it too.
"""

import zlib

import numpy as np

from quickvc.errors import (
    BadMagicError,
    ChecksumError,
    HeaderError,
    InvalidArgument,
    ShapeError,
    TruncatedFileError,
    UnsupportedVersionError,
)

MAGIC = b"QVCF"
FORMAT_VERSION = 1


def frames_to_bytes(frames: np.ndarray) -> bytes:
    frames = np.asarray(frames)
    if frames.ndim != 2:
        raise ShapeError(f"expected a (T, dim) matrix, got shape {frames.shape}")
    if frames.shape[1] < 1:
        raise InvalidArgument("frame dimension must be >= 1")
    data = np.ascontiguousarray(frames, dtype="<f4")
    payload = data.tobytes()
    return b"".join(
        [
            MAGIC,
            FORMAT_VERSION.to_bytes(4, "little"),
            int(data.shape[0]).to_bytes(4, "little"),
            int(data.shape[1]).to_bytes(4, "little"),
            payload,
            zlib.crc32(payload).to_bytes(4, "little"),
        ]
    )


def save_frames(path: str, frames: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(frames_to_bytes(frames))


def frames_from_bytes(blob: bytes) -> np.ndarray:
    """Parse a QVCF blob into a float32 (T, dim) array."""
    if len(blob) < 16:
        raise TruncatedFileError(f"frame container is {len(blob)} bytes; need >= 16")
    if blob[:4] != MAGIC:
        raise BadMagicError(f"not a QVCF container (magic {blob[:4]!r})")
    version = int.from_bytes(blob[4:8], "little")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"frame container version {version}; this engine reads {FORMAT_VERSION}"
        )
    t_len = int.from_bytes(blob[8:12], "little")
    dim = int.from_bytes(blob[12:16], "little")
    if dim < 1:
        raise HeaderError(f"frame dimension must be >= 1, got {dim}")
    payload_len = t_len * dim * 4
    total = 16 + payload_len + 4
    if len(blob) < total:
        raise TruncatedFileError(
            f"file is {len(blob)} bytes but {t_len}x{dim} frames need {total}"
        )
    if len(blob) > total:
        raise HeaderError(f"{len(blob) - total} trailing bytes after checksum")
    payload = blob[16 : 16 + payload_len]
    stored = int.from_bytes(blob[16 + payload_len :], "little")
    actual = zlib.crc32(payload)
    if stored != actual:
        raise ChecksumError(f"payload checksum {actual:#010x} != stored {stored:#010x}")
    return np.frombuffer(payload, dtype="<f4").reshape(t_len, dim).copy()


def load_frames(path: str) -> np.ndarray:
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise TruncatedFileError(f"cannot read {path}: {exc}") from exc
    return frames_from_bytes(blob)
