"""Shared exception base for the pipeline.

Every domain error raised by this package derives from PipelineError so the
CLI can map any of them to exit code 1 with a machine-readable record.
Concrete error classes live next to the code that raises them.
"""


class PipelineError(Exception):
    """Base class for all domain errors in this package."""

    def record(self) -> dict:
        """Machine-readable error record for the CLI."""
        return {"error": type(self).__name__, "detail": str(self)}
