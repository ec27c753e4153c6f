"""Batch export: manifest in, one EMB1 file plus provenance sidecar out.

The manifest is the pipeline's recordings table (csv with subject_id,
task, variant, audio_path columns; relative audio paths resolve against
the manifest's directory). Output files are named
<subject_id>__<task>__<variant>.<mode>.emb so the consumer can find them
by recording key, and each gets a <name>.json sidecar recording the
encoder id, encoder version, and pooling choice.

Pooling is the mean over the encoder's output frame axis, one vector per
window; the encoder emits a fixed frame count per window, so the mean is
well defined for padded final windows too.
"""

import csv
import io
import json
from pathlib import Path

import numpy as np

from . import emb1, windows
from .audio import load_wav, to_rate
from .errors import AudioUnreadable, ExportError, WriteFailure

POOLING = "mean"

_REQUIRED = ("subject_id", "task", "variant", "audio_path")


def read_manifest(path: Path) -> list:
    """(file_key, audio_path) pairs from a recordings table."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ExportError(f"manifest unreadable: {exc}") from exc
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or not set(_REQUIRED).issubset(reader.fieldnames):
        raise ExportError(f"manifest header must contain {list(_REQUIRED)}")
    out = []
    for i, row in enumerate(reader, start=2):
        cells = {k: (row.get(k) or "").strip() for k in _REQUIRED}
        if any(not cells[k] for k in _REQUIRED):
            raise ExportError(f"manifest line {i}: empty required cell")
        key = f"{cells['subject_id']}__{cells['task']}__{cells['variant']}"
        out.append((key, path.parent / cells["audio_path"]))
    return out


def export_recordings(manifest_path, out_dir, mode: str, encoder) -> list:
    """Encode every manifest recording; returns the written .emb names."""
    if mode not in emb1.MODE_BYTES:
        raise ExportError(f"unknown mode {mode!r}")
    entries = read_manifest(Path(manifest_path))
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise WriteFailure(f"{out}: {exc}") from exc
    written = []
    for key, audio_path in entries:
        samples, rate = load_wav(audio_path)
        samples = to_rate(samples, rate, encoder.rate)
        try:
            if mode == "seg30":
                bounds = windows.seg_bounds(len(samples), encoder.rate)
            else:
                bounds = windows.chunk_bounds(len(samples))
        except ValueError as exc:
            raise AudioUnreadable(f"{audio_path}: {exc}") from exc
        vecs = [encoder.encode(samples[a:b]).mean(axis=0) for a, b in bounds]
        payload = emb1.render(mode, np.stack(vecs))
        name = f"{key}.{mode}.emb"
        meta = {
            "dim": encoder.dim,
            "encoder": encoder.encoder_id,
            "encoder_version": encoder.version,
            "mode": mode,
            "pooling": POOLING,
            "rows": len(bounds),
            "source": Path(audio_path).name,
        }
        try:
            (out / name).write_bytes(payload)
            (out / f"{name}.json").write_text(
                json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )
        except OSError as exc:
            raise WriteFailure(f"{name}: {exc}") from exc
        written.append(name)
    return written
