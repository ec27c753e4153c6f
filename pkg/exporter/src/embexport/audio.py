"""WAV ingestion for the export loop."""

import wave

import numpy as np

from .errors import AudioUnreadable


def load_wav(path) -> tuple:
    """Read 16-bit PCM mono audio as float32 in [-1, 1], plus its rate."""
    try:
        with wave.open(str(path), "rb") as w:
            channels = w.getnchannels()
            width = w.getsampwidth()
            rate = w.getframerate()
            frames = w.readframes(w.getnframes())
    except (OSError, wave.Error, EOFError) as exc:
        raise AudioUnreadable(f"{path}: {exc}") from exc
    if width != 2:
        raise AudioUnreadable(f"{path}: only 16-bit PCM supported, got {8 * width}-bit")
    if channels != 1:
        raise AudioUnreadable(f"{path}: expected mono, got {channels} channels")
    samples = np.frombuffer(frames, dtype="<i2").astype(np.float32) / 32768.0
    if len(samples) == 0:
        raise AudioUnreadable(f"{path}: no samples")
    return samples, rate


def to_rate(samples: np.ndarray, rate: int, want: int) -> np.ndarray:
    """Linear resample to the encoder's rate; identity when rates match."""
    if rate == want:
        return samples
    n_out = max(1, int(round(len(samples) * want / rate)))
    t_in = np.arange(len(samples)) / rate
    t_out = np.arange(n_out) / want
    return np.interp(t_out, t_in, samples).astype(np.float32)
