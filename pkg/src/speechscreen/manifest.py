"""Dataset manifest: subject/recording tables, parsing, validation, summaries.

The corpus index is two comma-separated files (subjects have 1:N recordings,
so a single denormalized table would repeat per-subject fields):

    subjects file:   subject_id,diagnosis,age,gender,mmse
    recordings file: subject_id,task,variant,audio_path,transcript_path

Empty cells mean "absent". Unknown columns are ignored. Label strings are
case-sensitive.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Optional

from .errors import PipelineError


class ManifestError(PipelineError):
    pass


class MalformedRow(ManifestError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class UnknownLabel(ManifestError):
    def __init__(self, value: str):
        super().__init__(f"unknown label {value!r}")
        self.value = value


class DuplicateSubject(ManifestError):
    def __init__(self, subject_id: str):
        super().__init__(f"duplicate subject_id {subject_id!r}")
        self.subject_id = subject_id


class DuplicateRecording(ManifestError):
    def __init__(self, key: tuple):
        super().__init__(f"duplicate recording key {key!r}")
        self.key = key


class UnresolvedSubject(ManifestError):
    def __init__(self, subject_id: str):
        super().__init__(f"recording references unknown subject {subject_id!r}")
        self.subject_id = subject_id


class TaskKind(Enum):
    SFT = "SFT"
    PFT = "PFT"
    CTD = "CTD"


class Diagnosis(IntEnum):
    """Three-class label with the canonical ordering HC < MCI < Dementia.

    The integer values double as class indices for the models and as the
    deterministic tie-break order throughout the pipeline.
    """

    HC = 0
    MCI = 1
    Dementia = 2


class Gender(Enum):
    M = "M"
    F = "F"
    other = "other"


class Variant(Enum):
    raw = "raw"
    suppressed = "suppressed"
    subtracted = "subtracted"


MMSE_MIN = 0
MMSE_MAX = 30


@dataclass(frozen=True)
class SubjectRecord:
    subject_id: str
    diagnosis: Optional[Diagnosis] = None
    age: Optional[int] = None
    gender: Optional[Gender] = None
    mmse: Optional[int] = None

    def __post_init__(self):
        if not self.subject_id:
            raise ValueError("subject_id must be nonempty")
        if self.mmse is not None and not (MMSE_MIN <= self.mmse <= MMSE_MAX):
            raise ValueError(f"mmse {self.mmse} outside [{MMSE_MIN}, {MMSE_MAX}]")


@dataclass(frozen=True)
class RecordingEntry:
    subject_id: str
    task: TaskKind
    variant: Variant
    audio_path: str
    transcript_path: Optional[str] = None

    def __post_init__(self):
        if not self.audio_path:
            raise ValueError("audio_path must be nonempty")

    @property
    def key(self) -> tuple:
        return (self.subject_id, self.task, self.variant)

    @property
    def file_key(self) -> str:
        """Stable file-naming key: subjectid__task__variant."""
        return f"{self.subject_id}__{self.task.value}__{self.variant.value}"


@dataclass(frozen=True)
class DatasetManifest:
    subjects: tuple
    recordings: tuple
    _by_id: dict = field(init=False, repr=False, compare=False)
    _rec_by_key: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        by_id = {}
        for s in self.subjects:
            if s.subject_id in by_id:
                raise DuplicateSubject(s.subject_id)
            by_id[s.subject_id] = s
        rec_by_key = {}
        for r in self.recordings:
            if r.key in rec_by_key:
                raise DuplicateRecording(r.key)
            if r.subject_id not in by_id:
                raise UnresolvedSubject(r.subject_id)
            rec_by_key[r.key] = r
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_rec_by_key", rec_by_key)

    def subject(self, subject_id: str) -> SubjectRecord:
        return self._by_id[subject_id]

    def recording(self, subject_id: str, task: TaskKind, variant: Variant):
        return self._rec_by_key.get((subject_id, task, variant))

    def labeled_subjects(self) -> list:
        """Subjects usable for training/evaluation (diagnosis present)."""
        return [s for s in self.subjects if s.diagnosis is not None]


@dataclass(frozen=True)
class FeatureVector:
    """A named, finite feature block emitted by one extractor."""

    feature_set_id: str
    names: tuple
    values: tuple

    def __post_init__(self):
        if len(self.names) != len(self.values):
            raise ValueError(
                f"names/values length mismatch: {len(self.names)} vs {len(self.values)}"
            )
        for n, v in zip(self.names, self.values):
            fv = float(v)
            if fv != fv or fv in (float("inf"), float("-inf")):
                raise ValueError(f"non-finite feature value {n}={v!r}")


def _opt(cell: Optional[str]) -> Optional[str]:
    if cell is None:
        return None
    cell = cell.strip()
    return cell or None


def _parse_enum(enum_cls, value: str):
    try:
        return enum_cls[value] if issubclass(enum_cls, IntEnum) else enum_cls(value)
    except (KeyError, ValueError):
        raise UnknownLabel(value) from None


def parse_subjects(text: str) -> list:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or "subject_id" not in reader.fieldnames:
        raise MalformedRow(1, "missing header with subject_id column")
    out = []
    for i, row in enumerate(reader):
        line = i + 2
        sid = _opt(row.get("subject_id"))
        if sid is None:
            raise MalformedRow(line, "empty subject_id")
        diagnosis = _opt(row.get("diagnosis"))
        if diagnosis is not None:
            diagnosis = _parse_enum(Diagnosis, diagnosis)
        gender = _opt(row.get("gender"))
        if gender is not None:
            gender = _parse_enum(Gender, gender)
        age = _opt(row.get("age"))
        if age is not None:
            try:
                age = int(age)
            except ValueError:
                raise MalformedRow(line, f"age {age!r} is not an integer") from None
        mmse = _opt(row.get("mmse"))
        if mmse is not None:
            try:
                mmse = int(mmse)
            except ValueError:
                raise MalformedRow(line, f"mmse {mmse!r} is not an integer") from None
            if not (MMSE_MIN <= mmse <= MMSE_MAX):
                raise MalformedRow(line, f"mmse {mmse} outside [{MMSE_MIN}, {MMSE_MAX}]")
        out.append(
            SubjectRecord(subject_id=sid, diagnosis=diagnosis, age=age, gender=gender, mmse=mmse)
        )
    return out


def parse_recordings(text: str) -> list:
    reader = csv.DictReader(io.StringIO(text))
    required = {"subject_id", "task", "variant", "audio_path"}
    if reader.fieldnames is None or not required.issubset(reader.fieldnames):
        raise MalformedRow(1, f"header must contain {sorted(required)}")
    out = []
    for i, row in enumerate(reader):
        line = i + 2
        sid = _opt(row.get("subject_id"))
        if sid is None:
            raise MalformedRow(line, "empty subject_id")
        task = _opt(row.get("task"))
        if task is None:
            raise MalformedRow(line, "empty task")
        variant = _opt(row.get("variant"))
        if variant is None:
            raise MalformedRow(line, "empty variant")
        audio_path = _opt(row.get("audio_path"))
        if audio_path is None:
            raise MalformedRow(line, "empty audio_path")
        out.append(
            RecordingEntry(
                subject_id=sid,
                task=_parse_enum(TaskKind, task),
                variant=_parse_enum(Variant, variant),
                audio_path=audio_path,
                transcript_path=_opt(row.get("transcript_path")),
            )
        )
    return out


def parse_manifest(subjects_text: str, recordings_text: str) -> DatasetManifest:
    return DatasetManifest(
        subjects=tuple(parse_subjects(subjects_text)),
        recordings=tuple(parse_recordings(recordings_text)),
    )


def serialize_subjects(subjects, imputed_flags=None) -> str:
    """Subjects table as CSV text.

    imputed_flags, when given, adds the mmse_imputed column (0/1 per subject,
    aligned with the subjects sequence).
    """
    buf = io.StringIO()
    cols = ["subject_id", "diagnosis", "age", "gender", "mmse"]
    if imputed_flags is not None:
        cols.append("mmse_imputed")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for i, s in enumerate(subjects):
        row = [
            s.subject_id,
            s.diagnosis.name if s.diagnosis is not None else "",
            s.age if s.age is not None else "",
            s.gender.value if s.gender is not None else "",
            s.mmse if s.mmse is not None else "",
        ]
        if imputed_flags is not None:
            row.append(int(bool(imputed_flags[i])))
        w.writerow(row)
    return buf.getvalue()


def serialize_recordings(recordings) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["subject_id", "task", "variant", "audio_path", "transcript_path"])
    for r in recordings:
        w.writerow(
            [r.subject_id, r.task.value, r.variant.value, r.audio_path, r.transcript_path or ""]
        )
    return buf.getvalue()


def serialize_manifest(manifest: DatasetManifest) -> tuple:
    return serialize_subjects(manifest.subjects), serialize_recordings(manifest.recordings)


@dataclass(frozen=True)
class CorpusSummary:
    per_class: dict
    per_task: dict
    undiagnosed: int
    n_subjects: int
    n_recordings: int


def corpus_summary(manifest: DatasetManifest) -> CorpusSummary:
    per_class = {d: 0 for d in Diagnosis}
    undiagnosed = 0
    for s in manifest.subjects:
        if s.diagnosis is None:
            undiagnosed += 1
        else:
            per_class[s.diagnosis] += 1
    per_task = {t: 0 for t in TaskKind}
    for r in manifest.recordings:
        per_task[r.task] += 1
    return CorpusSummary(
        per_class=per_class,
        per_task=per_task,
        undiagnosed=undiagnosed,
        n_subjects=len(manifest.subjects),
        n_recordings=len(manifest.recordings),
    )
