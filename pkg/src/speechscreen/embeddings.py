"""Bit-exact embedding file store, aggregation schemes, and test provider.

File layout (little-endian):

    offset  size  field
    0       4     magic "EMB1"
    4       1     mode (0 = SEG30, 1 = CHUNK16)
    5       4     rows, unsigned 32-bit
    9       4     dim, unsigned 32-bit
    13      -     rows*dim IEEE-754 float32 values, row-major

SEG30 files hold one row per consecutive 30-second window of a recording
(final partial window included); CHUNK16 files hold exactly 16 rows, one per
chunk of the boundary plan floor(i*L/16). Files are named
<subjectid__task__variant>.<mode>.emb.

Embedding extraction is externalized to these files so the core pipeline
stays runtime-free; the deterministic test provider below stands in for a
pretrained encoder in tests and synthetic runs.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .audio import AudioBuffer
from .errors import PipelineError
from .manifest import FeatureVector

MAGIC = b"EMB1"
_HEADER = struct.Struct("<4sBII")

SEG30_WINDOW_S = 30
N_CHUNKS = 16

MEAN_FEATURE_SET_ID = "whisper_mean"
TIMES16_FEATURE_SET_ID = "whisper_times16"


class EmbeddingError(PipelineError):
    pass


class BadMagic(EmbeddingError):
    pass


class BadHeader(EmbeddingError):
    pass


class TruncatedPayload(EmbeddingError):
    pass


class ExcessPayload(EmbeddingError):
    pass


class NonFiniteValue(EmbeddingError):
    pass


class ChunkModeRowMismatch(EmbeddingError):
    pass


class WrongMode(EmbeddingError):
    pass


class AudioTooShort(EmbeddingError):
    pass


class EmbeddingMode(Enum):
    SEG30 = 0
    CHUNK16 = 1

    @property
    def file_tag(self) -> str:
        return self.name.lower()

    @classmethod
    def from_tag(cls, tag: str) -> "EmbeddingMode":
        for m in cls:
            if m.file_tag == tag:
                return m
        raise ValueError(f"unknown embedding mode tag {tag!r}")


@dataclass(frozen=True)
class EmbeddingFile:
    mode: EmbeddingMode
    values: np.ndarray  # (rows, dim) float32

    def __post_init__(self):
        v = self.values
        if v.ndim != 2:
            raise BadHeader(f"values must be 2-d, got shape {v.shape}")
        rows, dim = v.shape
        if rows < 1 or dim < 1:
            raise BadHeader(f"rows and dim must be >= 1, got {rows}x{dim}")
        if self.mode is EmbeddingMode.CHUNK16 and rows != N_CHUNKS:
            raise ChunkModeRowMismatch(f"CHUNK16 requires {N_CHUNKS} rows, got {rows}")
        if not np.all(np.isfinite(v)):
            raise NonFiniteValue("embedding contains NaN or Inf")
        if v.dtype != np.float32:
            object.__setattr__(self, "values", v.astype(np.float32))

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


def read_embedding_file(data: bytes) -> EmbeddingFile:
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagic("missing EMB1 magic")
    if len(data) < _HEADER.size:
        raise TruncatedPayload(f"header needs {_HEADER.size} bytes, got {len(data)}")
    _, mode_byte, rows, dim = _HEADER.unpack_from(data, 0)
    try:
        mode = EmbeddingMode(mode_byte)
    except ValueError:
        raise BadHeader(f"unknown mode byte {mode_byte}") from None
    if rows < 1 or dim < 1:
        raise BadHeader(f"rows and dim must be >= 1, got {rows}x{dim}")
    if mode is EmbeddingMode.CHUNK16 and rows != N_CHUNKS:
        raise ChunkModeRowMismatch(f"CHUNK16 requires {N_CHUNKS} rows, got {rows}")
    need = rows * dim * 4
    payload = data[_HEADER.size :]
    if len(payload) < need:
        raise TruncatedPayload(f"payload needs {need} bytes, got {len(payload)}")
    if len(payload) > need:
        raise ExcessPayload(f"{len(payload) - need} trailing bytes")
    values = np.frombuffer(payload, dtype="<f4").reshape(rows, dim).copy()
    if not np.all(np.isfinite(values)):
        raise NonFiniteValue("embedding contains NaN or Inf")
    return EmbeddingFile(mode=mode, values=values)


def write_embedding_file(emb: EmbeddingFile) -> bytes:
    header = _HEADER.pack(MAGIC, emb.mode.value, emb.rows, emb.dim)
    return header + np.ascontiguousarray(emb.values, dtype="<f4").tobytes()


@dataclass(frozen=True)
class ChunkPlan:
    boundaries: tuple  # 17 sample indices, boundaries[i] = floor(i*L/16)

    def __post_init__(self):
        if len(self.boundaries) != N_CHUNKS + 1:
            raise ValueError(f"need {N_CHUNKS + 1} boundaries")

    def slices(self) -> list:
        b = self.boundaries
        return [slice(b[i], b[i + 1]) for i in range(N_CHUNKS)]

    def sizes(self) -> list:
        b = self.boundaries
        return [b[i + 1] - b[i] for i in range(N_CHUNKS)]


def chunk_plan(length_samples: int) -> ChunkPlan:
    """Boundary plan splitting L samples into 16 chunks of near-equal size.

    boundaries[i] = floor(i*L/16), so chunk sizes differ by at most one and
    no padding is ever introduced by the plan.
    """
    if length_samples < N_CHUNKS:
        raise AudioTooShort(f"need >= {N_CHUNKS} samples, got {length_samples}")
    return ChunkPlan(
        boundaries=tuple(i * length_samples // N_CHUNKS for i in range(N_CHUNKS + 1))
    )


def mean_pool(emb: EmbeddingFile) -> FeatureVector:
    """Elementwise mean over a SEG30 file's rows; one vector for the recording."""
    if emb.mode is not EmbeddingMode.SEG30:
        raise WrongMode(f"mean_pool requires SEG30, got {emb.mode.name}")
    pooled = emb.values.astype(np.float64).mean(axis=0)
    return FeatureVector(
        feature_set_id=MEAN_FEATURE_SET_ID,
        names=tuple(f"e{i}" for i in range(emb.dim)),
        values=tuple(float(v) for v in pooled),
    )


def concat_chunks(emb: EmbeddingFile) -> FeatureVector:
    """Rows of a CHUNK16 file concatenated in chunk order (order-preserving)."""
    if emb.mode is not EmbeddingMode.CHUNK16:
        raise WrongMode(f"concat_chunks requires CHUNK16, got {emb.mode.name}")
    flat = emb.values.astype(np.float64).reshape(-1)
    names = tuple(f"c{c:02d}_e{i}" for c in range(N_CHUNKS) for i in range(emb.dim))
    return FeatureVector(
        feature_set_id=TIMES16_FEATURE_SET_ID,
        names=names,
        values=tuple(float(v) for v in flat),
    )


def _window_row(window: np.ndarray, dim: int, seed: int, noise_scale: float) -> np.ndarray:
    """Deterministic pseudo-embedding for one window.

    A keyed generator is seeded with a content hash of the window samples
    (plus seed and dim), and the window's mean energy is added to every
    dimension so energy differences stay linearly recoverable.
    """
    key = hashlib.blake2b(digest_size=8)
    key.update(np.ascontiguousarray(window, dtype="<f8").tobytes())
    key.update(struct.pack("<qI", seed, dim))
    rng = np.random.default_rng(int.from_bytes(key.digest(), "little"))
    energy = float(np.mean(window * window)) if len(window) else 0.0
    return rng.standard_normal(dim) * noise_scale + energy


def test_embedding(
    audio: AudioBuffer,
    dim: int,
    mode: EmbeddingMode,
    seed: int,
    noise_scale: float = 0.05,
) -> EmbeddingFile:
    """Deterministic stand-in for a pretrained encoder.

    SEG30 windows are consecutive 30-second spans with the final partial
    window included; CHUNK16 windows follow chunk_plan.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    x = audio.samples
    if mode is EmbeddingMode.SEG30:
        win = SEG30_WINDOW_S * audio.sample_rate
        n_rows = math.ceil(len(x) / win)
        windows = [x[i * win : (i + 1) * win] for i in range(n_rows)]
    else:
        windows = [x[s] for s in chunk_plan(len(x)).slices()]
    rows = np.stack([_window_row(w, dim, seed, noise_scale) for w in windows])
    return EmbeddingFile(mode=mode, values=rows.astype(np.float32))
