"""Window plans over a recording's samples.

seg30 tiles the recording with consecutive 30-second windows and keeps the
final partial window; the encoder's feature extractor pads it to the fixed
input span. chunk16 splits the full recording into 16 near-equal chunks
with boundaries floor(i*L/16), so no sample is dropped or duplicated and
chunk sizes differ by at most one.
"""

SEG_S = 30
N_CHUNKS = 16


def seg_bounds(n_samples: int, rate: int) -> list:
    """[start, end) sample ranges of consecutive 30-second windows."""
    if n_samples < 1:
        raise ValueError("empty audio")
    win = SEG_S * rate
    return [(s, min(s + win, n_samples)) for s in range(0, n_samples, win)]


def chunk_bounds(n_samples: int) -> list:
    """16 [start, end) ranges with boundaries floor(i*L/16)."""
    if n_samples < N_CHUNKS:
        raise ValueError(f"need >= {N_CHUNKS} samples, got {n_samples}")
    edges = [i * n_samples // N_CHUNKS for i in range(N_CHUNKS + 1)]
    return [(edges[i], edges[i + 1]) for i in range(N_CHUNKS)]
