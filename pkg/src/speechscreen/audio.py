"""WAV reading/writing and frame-level energy series.

Only RIFF/WAVE little-endian PCM 16-bit mono at 16 kHz is accepted; no
resampling. Samples are scaled to [-1, 1] by dividing by 32768.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import PipelineError

SAMPLE_RATE = 16000


class AudioError(PipelineError):
    pass


class NotWav(AudioError):
    pass


class UnsupportedEncoding(AudioError):
    pass


class UnsupportedChannels(AudioError):
    def __init__(self, n: int):
        super().__init__(f"expected mono audio, got {n} channels")
        self.channels = n


class UnsupportedRate(AudioError):
    def __init__(self, hz: int):
        super().__init__(f"expected {SAMPLE_RATE} Hz, got {hz} Hz")
        self.rate = hz


class EmptyAudio(AudioError):
    pass


@dataclass(frozen=True)
class AudioBuffer:
    samples: np.ndarray  # float64 in [-1, 1]
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        if self.sample_rate != SAMPLE_RATE:
            raise UnsupportedRate(self.sample_rate)
        if len(self.samples) == 0:
            raise EmptyAudio("empty sample buffer")
        if not np.all(np.isfinite(self.samples)):
            raise AudioError("non-finite samples")
        if np.any(self.samples < -1.0) or np.any(self.samples > 1.0):
            raise AudioError("samples outside [-1, 1]")

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate


def read_wav(data: bytes) -> AudioBuffer:
    """Parse a RIFF/WAVE byte string into an AudioBuffer.

    Walks the chunk list directly so malformed containers and unsupported
    encodings map to distinct errors.
    """
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise NotWav("missing RIFF/WAVE header")
    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos : pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8 : pos + 8 + size]
        if len(body) < size:
            raise NotWav(f"truncated {cid!r} chunk")
        if cid == b"fmt ":
            if size < 16:
                raise NotWav("fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif cid == b"data":
            payload = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned
    if fmt is None or payload is None:
        raise NotWav("missing fmt or data chunk")
    audio_format, channels, rate, _byte_rate, _block_align, bits = fmt
    if audio_format != 1:
        raise UnsupportedEncoding(f"format tag {audio_format}, only PCM (1) supported")
    if bits != 16:
        raise UnsupportedEncoding(f"{bits}-bit samples, only 16-bit supported")
    if channels != 1:
        raise UnsupportedChannels(channels)
    if rate != SAMPLE_RATE:
        raise UnsupportedRate(rate)
    if len(payload) == 0:
        raise EmptyAudio("data chunk is empty")
    if len(payload) % 2 != 0:
        raise NotWav("odd data chunk size for 16-bit samples")
    samples = np.frombuffer(payload, dtype="<i2").astype(np.float64) / 32768.0
    return AudioBuffer(samples=samples)


def write_wav(samples: np.ndarray) -> bytes:
    """Encode float samples in [-1, 1] as a 16 kHz mono PCM16 WAV byte string."""
    pcm = np.clip(np.round(np.asarray(samples, dtype=np.float64) * 32768.0), -32768, 32767)
    pcm = pcm.astype("<i2")
    body = pcm.tobytes()
    hdr = b"".join(
        [
            b"RIFF",
            struct.pack("<I", 36 + len(body)),
            b"WAVE",
            b"fmt ",
            struct.pack("<IHHIIHH", 16, 1, 1, SAMPLE_RATE, SAMPLE_RATE * 2, 2, 16),
            b"data",
            struct.pack("<I", len(body)),
        ]
    )
    return hdr + body


@dataclass(frozen=True)
class EnergySeries:
    energies: np.ndarray  # mean-square per frame, nonnegative
    frame_ms: int
    hop_ms: int

    def __post_init__(self):
        if len(self.energies) == 0:
            raise ValueError("empty energy series")
        if np.any(self.energies < 0) or not np.all(np.isfinite(self.energies)):
            raise ValueError("energies must be finite and nonnegative")


def frame_energies(audio: AudioBuffer, frame_ms: int = 25, hop_ms: int = 10) -> EnergySeries:
    """Mean-square energy per analysis frame.

    Frame k covers samples [k*hop, k*hop + frame). The trailing partial
    window is dropped, unless the signal is shorter than one frame, in which
    case a single frame spans all samples.
    """
    if not (frame_ms >= hop_ms >= 1):
        raise ValueError(f"need frame_ms >= hop_ms >= 1, got {frame_ms}/{hop_ms}")
    x = audio.samples
    frame_len = frame_ms * audio.sample_rate // 1000
    hop_len = hop_ms * audio.sample_rate // 1000
    if len(x) < frame_len:
        energies = np.array([np.mean(x * x)])
    else:
        windows = np.lib.stride_tricks.sliding_window_view(x, frame_len)[::hop_len]
        energies = np.mean(windows * windows, axis=1)
    return EnergySeries(energies=energies, frame_ms=frame_ms, hop_ms=hop_ms)
