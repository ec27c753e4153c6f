"""Offline embedding exporter.

Runs a pretrained speech encoder over the recordings listed in a manifest
and writes one EMB1 file per recording, either as consecutive 30-second
segments (seg30) or as a fixed 16-chunk split (chunk16). The screening
pipeline that consumes these files never loads the encoder runtime; this
tool is the only place the two meet, and they meet only through the files.

Heavy imports (torch, transformers) stay inside the encoder module so the
window plans and the file writer import instantly everywhere.
"""

from .errors import AudioUnreadable, EncoderUnavailable, ExportError, WriteFailure

__all__ = [
    "AudioUnreadable",
    "EncoderUnavailable",
    "ExportError",
    "WriteFailure",
]
