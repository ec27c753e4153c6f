class ExportError(Exception):
    """Base class for exporter failures."""


class EncoderUnavailable(ExportError):
    """The encoder runtime cannot be imported or its weights cannot be loaded."""


class AudioUnreadable(ExportError):
    """A manifest entry points at audio that cannot be decoded."""


class WriteFailure(ExportError):
    """An output file or directory could not be written."""
