"""Synthetic screening corpus with class-dependent structure.

Audio is tone bursts separated by silences whose length scales with
diagnosis, so pause features carry signal; transcripts carry matching
fluency counts and lexical richness.  Every draw flows from
SeedSequence([seed, class_index, subject_index]), so a corpus is a pure
function of its config and any subject can be regenerated alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .audio import SAMPLE_RATE, write_wav
from .errors import PipelineError
from .linguistic import default_animal_lexicon
from .manifest import (
    DatasetManifest,
    Diagnosis,
    Gender,
    RecordingEntry,
    SubjectRecord,
    TaskKind,
    Variant,
    serialize_recordings,
    serialize_subjects,
)


class IoFailure(PipelineError):
    pass


@dataclass(frozen=True)
class ClassProfile:
    pause_multiplier: float
    fluency_mean: float
    fluency_sd: float
    mmse_mean: float
    mmse_sd: float
    n_sentences: int
    vocab_breadth: int  # CTD word-bank prefix length


DEFAULT_PROFILES = {
    Diagnosis.HC: ClassProfile(1.0, 18.0, 2.0, 29.0, 1.0, 8, 60),
    Diagnosis.MCI: ClassProfile(1.6, 12.0, 2.0, 26.0, 2.0, 6, 40),
    Diagnosis.Dementia: ClassProfile(2.4, 6.0, 2.0, 18.0, 3.0, 4, 25),
}


@dataclass(frozen=True)
class SynthConfig:
    n_per_class: int = 20
    seed: int = 0
    missing_mmse_fraction: float = 0.1
    n_bursts: int = 7
    profiles: dict = field(default_factory=lambda: dict(DEFAULT_PROFILES))

    def __post_init__(self):
        if self.n_per_class < 2:
            raise PipelineError("need at least 2 subjects per class")
        if not 0.0 <= self.missing_mmse_fraction < 1.0:
            raise PipelineError("missing_mmse_fraction outside [0, 1)")
        if self.n_bursts < 2:
            raise PipelineError("need at least 2 bursts per recording")


@dataclass(frozen=True)
class SynthCorpus:
    manifest: DatasetManifest
    audio: dict  # file_key -> float64 samples
    transcripts: dict  # file_key -> text


_CLASS_PREFIX = {Diagnosis.HC: "hc", Diagnosis.MCI: "mci", Diagnosis.Dementia: "dem"}

_P_WORDS = (
    "pencil", "planet", "purple", "pocket", "pillow", "pepper", "palace",
    "puzzle", "parrot", "peanut", "picture", "pirate", "plastic", "pumpkin",
    "package", "pattern", "pebble", "postcard", "powder", "prairie",
    "princess", "profile", "pudding", "pyramid", "python",
)

_CTD_BANK = (
    "water", "window", "mother", "child", "cookie", "jar", "stool", "sink",
    "dish", "towel", "curtain", "garden", "floor", "counter", "cupboard",
    "plate", "overflow", "reach", "fall", "wash", "dry", "stand", "climb",
    "laugh", "spill", "kitchen", "outside", "summer", "day", "boy", "girl",
    "hand", "shelf", "open", "tap", "running", "wet", "shoe", "apron",
    "smile", "look", "take", "give", "hold", "tip", "slip", "grass", "tree",
    "path", "house", "yard", "cloud", "light", "shadow", "corner", "door",
    "step", "plant", "leaf", "stone",
)


def _tone_burst(rng, sr: int) -> np.ndarray:
    dur = rng.uniform(0.35, 0.6)
    freq = rng.uniform(150.0, 450.0)
    t = np.arange(int(round(dur * sr))) / sr
    return 0.25 * np.sin(2.0 * np.pi * freq * t)


def _recording_audio(rng, profile: ClassProfile, n_bursts: int) -> np.ndarray:
    sr = SAMPLE_RATE
    parts = []
    for i in range(n_bursts):
        if i:
            gap = rng.uniform(0.30, 0.45) * profile.pause_multiplier
            parts.append(np.zeros(int(round(gap * sr))))
        parts.append(_tone_burst(rng, sr))
    return np.concatenate(parts)


def _count(rng, mean: float, sd: float, lo: int, hi: int) -> int:
    return int(np.clip(round(rng.normal(mean, sd)), lo, hi))


def _sft_text(rng, count: int, animals: tuple) -> str:
    picked = rng.choice(len(animals), size=min(count, len(animals)), replace=False)
    return " ".join(animals[i] for i in sorted(picked))


def _pft_text(rng, count: int) -> str:
    picked = rng.choice(len(_P_WORDS), size=min(count, len(_P_WORDS)), replace=False)
    return " ".join(_P_WORDS[i] for i in sorted(picked))


def _ctd_text(rng, profile: ClassProfile) -> str:
    bank = _CTD_BANK[: profile.vocab_breadth]
    n_sent = max(1, profile.n_sentences + int(rng.integers(-1, 2)))
    sentences = []
    for _ in range(n_sent):
        k = int(rng.integers(5, 11))
        words = [bank[int(i)] for i in rng.integers(0, len(bank), size=k)]
        sentences.append(" ".join(words) + ".")
    return " ".join(sentences)


def synth_corpus(config: SynthConfig = SynthConfig()) -> SynthCorpus:
    # one-word entries only, so the animal count is exactly the token count
    animals = tuple(e for e in default_animal_lexicon().entries if " " not in e)
    genders = (Gender.F, Gender.M, Gender.other)
    subjects: list[SubjectRecord] = []
    recordings: list[RecordingEntry] = []
    audio: dict[str, np.ndarray] = {}
    transcripts: dict[str, str] = {}

    for class_idx, diag in enumerate(Diagnosis):
        profile = config.profiles[diag]
        for j in range(config.n_per_class):
            ss = np.random.SeedSequence([config.seed, class_idx, j])
            rng = np.random.default_rng(ss)
            sid = f"{_CLASS_PREFIX[diag]}{j + 1:02d}"
            age = int(np.clip(round(rng.normal(68.0, 8.0)), 50, 90))
            mmse = _count(rng, profile.mmse_mean, profile.mmse_sd, 0, 30)
            # j == 0 stays a donor so class means remain defined
            if j > 0 and rng.uniform() < config.missing_mmse_fraction:
                mmse = None
            subjects.append(
                SubjectRecord(
                    subject_id=sid,
                    diagnosis=diag,
                    mmse=mmse,
                    age=age,
                    gender=genders[j % 3],
                )
            )
            fluency = _count(rng, profile.fluency_mean, profile.fluency_sd, 2, 24)
            task_rngs = [np.random.default_rng(c) for c in ss.spawn(3)]
            for task, trng in zip((TaskKind.SFT, TaskKind.PFT, TaskKind.CTD), task_rngs):
                entry = RecordingEntry(
                    subject_id=sid,
                    task=task,
                    variant=Variant.raw,
                    audio_path=f"audio/{sid}__{task.value}__raw.wav",
                    transcript_path=f"transcripts/{sid}__{task.value}__raw.txt",
                )
                recordings.append(entry)
                audio[entry.file_key] = _recording_audio(
                    trng, profile, config.n_bursts
                )
                if task is TaskKind.SFT:
                    text = _sft_text(trng, fluency, animals)
                elif task is TaskKind.PFT:
                    text = _pft_text(trng, fluency)
                else:
                    text = _ctd_text(trng, profile)
                transcripts[entry.file_key] = text

    manifest = DatasetManifest(
        subjects=tuple(subjects), recordings=tuple(recordings)
    )
    return SynthCorpus(manifest=manifest, audio=audio, transcripts=transcripts)


def write_corpus(corpus: SynthCorpus, root: Path) -> None:
    root = Path(root)
    try:
        (root / "audio").mkdir(parents=True, exist_ok=True)
        (root / "transcripts").mkdir(parents=True, exist_ok=True)
        for entry in corpus.manifest.recordings:
            wav = write_wav(corpus.audio[entry.file_key])
            (root / entry.audio_path).write_bytes(wav)
            (root / entry.transcript_path).write_text(
                corpus.transcripts[entry.file_key] + "\n", encoding="utf-8"
            )
        (root / "subjects.csv").write_text(
            serialize_subjects(corpus.manifest.subjects), encoding="utf-8"
        )
        (root / "recordings.csv").write_text(
            serialize_recordings(corpus.manifest.recordings), encoding="utf-8"
        )
    except OSError as exc:
        raise IoFailure(f"cannot write corpus under {root}: {exc}") from exc
