"""EMB1 file rendering.

Layout, little-endian throughout:

    offset  size  field
    0       4     magic "EMB1"
    4       1     mode (0 = seg30, 1 = chunk16)
    5       4     rows, unsigned 32-bit
    9       4     dim, unsigned 32-bit
    13      -     rows*dim IEEE-754 float32 values, row-major

chunk16 files carry exactly 16 rows; seg30 files carry one row per window.
"""

import struct

import numpy as np

MAGIC = b"EMB1"
_HEADER = struct.Struct("<4sBII")

MODE_BYTES = {"seg30": 0, "chunk16": 1}
N_CHUNKS = 16


def render(mode: str, values: np.ndarray) -> bytes:
    """Serialize a (rows, dim) array as one EMB1 byte string."""
    if mode not in MODE_BYTES:
        raise ValueError(f"unknown mode {mode!r}")
    v = np.ascontiguousarray(values, dtype="<f4")
    if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
        raise ValueError(f"values must be a non-empty 2-d array, got shape {np.shape(values)}")
    if mode == "chunk16" and v.shape[0] != N_CHUNKS:
        raise ValueError(f"chunk16 files carry {N_CHUNKS} rows, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite embedding value")
    return _HEADER.pack(MAGIC, MODE_BYTES[mode], v.shape[0], v.shape[1]) + v.tobytes()
