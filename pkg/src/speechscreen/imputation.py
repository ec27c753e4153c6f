"""Diagnosis-conditional mean imputation for missing MMSE scores.

Missing scores become the rounded (half-up) mean of the observed scores in
the same diagnosis class, clamped to the MMSE range. Observed values are
never touched and the operation is idempotent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import PipelineError
from .manifest import MMSE_MAX, MMSE_MIN, SubjectRecord


class ImputationError(PipelineError):
    pass


class NoDonorsForClass(ImputationError):
    def __init__(self, diagnosis):
        super().__init__(f"no observed MMSE in class {diagnosis.name}")
        self.diagnosis = diagnosis


class MissingDiagnosis(ImputationError):
    def __init__(self, subject_id: str):
        super().__init__(f"subject {subject_id!r} has no diagnosis to impute from")
        self.subject_id = subject_id


@dataclass(frozen=True)
class ImputedSubject:
    record: SubjectRecord
    imputed: bool


def impute_mmse(subjects: list) -> list:
    """Fill missing MMSE with class means; returns records plus imputed flags."""
    observed = {}
    for s in subjects:
        if s.mmse is not None and s.diagnosis is not None:
            observed.setdefault(s.diagnosis, []).append(s.mmse)

    out = []
    for s in subjects:
        if s.mmse is not None:
            out.append(ImputedSubject(record=s, imputed=False))
            continue
        if s.diagnosis is None:
            raise MissingDiagnosis(s.subject_id)
        donors = observed.get(s.diagnosis)
        if not donors:
            raise NoDonorsForClass(s.diagnosis)
        mean = sum(donors) / len(donors)
        value = int(math.floor(mean + 0.5))  # round half up; MMSE is integer-valued
        value = max(MMSE_MIN, min(MMSE_MAX, value))
        out.append(ImputedSubject(record=replace(s, mmse=value), imputed=True))
    return out
