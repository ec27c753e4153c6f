"""Stratified repeated-holdout evaluation and the metrics it reports."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import PipelineError
from .manifest import Diagnosis


class EvaluationError(PipelineError):
    pass


class LengthMismatch(EvaluationError):
    pass


class ClassTooSmall(EvaluationError):
    def __init__(self, diagnosis: Diagnosis, count: int):
        super().__init__(f"class {diagnosis.name} has {count} subjects, need >= 2")
        self.diagnosis = diagnosis
        self.count = count


class RepetitionFailed(EvaluationError):
    """Wraps an error raised while scoring one repetition."""

    def __init__(self, rep_index: int, cause: Exception):
        super().__init__(f"repetition {rep_index}: {cause}")
        self.rep_index = rep_index
        self.cause = cause


def macro_f1(y_true: Sequence[Diagnosis], y_pred: Sequence[Diagnosis]) -> float:
    """Unweighted mean of per-class F1.

    Classes absent from y_true are left out of the mean; a class that is
    present but never predicted correctly contributes 0.
    """
    if len(y_true) != len(y_pred):
        raise LengthMismatch(f"{len(y_true)} labels vs {len(y_pred)} predictions")
    if not y_true:
        raise LengthMismatch("cannot score an empty label set")
    t = np.asarray([int(v) for v in y_true])
    p = np.asarray([int(v) for v in y_pred])
    scores = []
    for c in Diagnosis:
        support = int(np.sum(t == c))
        if support == 0:
            continue
        tp = int(np.sum((t == c) & (p == c)))
        fp = int(np.sum((t != c) & (p == c)))
        fn = support - tp
        denom = 2 * tp + fp + fn
        scores.append(0.0 if denom == 0 else 2 * tp / denom)
    return float(np.mean(scores))


def rmse(y_true: Sequence[float], y_pred: Sequence[float]) -> float:
    if len(y_true) != len(y_pred):
        raise LengthMismatch(f"{len(y_true)} targets vs {len(y_pred)} predictions")
    if not len(y_true):
        raise LengthMismatch("cannot score an empty target set")
    t = np.asarray(y_true, dtype=np.float64)
    p = np.asarray(y_pred, dtype=np.float64)
    return float(np.sqrt(np.mean((t - p) ** 2)))


def confusion_matrix(
    y_true: Sequence[Diagnosis], y_pred: Sequence[Diagnosis]
) -> np.ndarray:
    """3x3 counts, rows = true class, columns = predicted, HC/MCI/Dementia order."""
    if len(y_true) != len(y_pred):
        raise LengthMismatch(f"{len(y_true)} labels vs {len(y_pred)} predictions")
    out = np.zeros((len(Diagnosis), len(Diagnosis)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        out[int(t), int(p)] += 1
    return out


@dataclass(frozen=True)
class SplitPlan:
    """Reproducible stratified train/validation splits.

    splits[i] is a pair of sorted subject-id tuples (train, val); the two
    sides of every repetition are disjoint and cover all labeled ids.
    """

    seed: int
    repetitions: int
    train_fraction: float
    splits: tuple


def make_splits(
    labeled: Sequence[tuple[str, Diagnosis]],
    seed: int,
    repetitions: int = 100,
    train_fraction: float = 0.75,
) -> SplitPlan:
    if not 0.0 < train_fraction < 1.0:
        raise EvaluationError(f"train_fraction {train_fraction} outside (0, 1)")
    if repetitions < 1:
        raise EvaluationError("need at least one repetition")
    by_class: dict[Diagnosis, list[str]] = {d: [] for d in Diagnosis}
    for sid, diag in labeled:
        by_class[diag].append(sid)
    # absent classes simply contribute no stratum; present ones need >= 2
    # so both sides of every split see the class
    present = [d for d in Diagnosis if by_class[d]]
    if not present:
        raise EvaluationError("no labeled subjects")
    for d in present:
        if len(by_class[d]) < 2:
            raise ClassTooSmall(d, len(by_class[d]))
        by_class[d].sort()

    children = np.random.SeedSequence(seed).spawn(repetitions)
    splits = []
    for child in children:
        rng = np.random.default_rng(child)
        train: list[str] = []
        val: list[str] = []
        for d in present:
            ids = by_class[d]
            k = max(1, int(math.floor(train_fraction * len(ids))))
            perm = rng.permutation(len(ids))
            train.extend(ids[i] for i in perm[:k])
            val.extend(ids[i] for i in perm[k:])
        splits.append((tuple(sorted(train)), tuple(sorted(val))))
    return SplitPlan(
        seed=seed,
        repetitions=repetitions,
        train_fraction=train_fraction,
        splits=tuple(splits),
    )


@dataclass(frozen=True)
class BootstrapReport:
    """Per-repetition metric values plus the config digest they came from."""

    metric_kind: str  # "macro_f1" | "rmse"
    values: tuple
    config_digest: str = ""

    def __post_init__(self):
        if not self.values:
            raise EvaluationError("report needs at least one value")
        if any(not math.isfinite(v) for v in self.values):
            raise EvaluationError("non-finite metric value")

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def std(self) -> float:
        # population std: the repetitions are the whole population of runs
        return float(np.std(self.values))


def serialize_report(report: BootstrapReport) -> str:
    lines = ["# bootstrap-report v1"]
    lines.append(f"metric={report.metric_kind}")
    lines.append(f"config_digest={report.config_digest}")
    lines.append(f"repetitions={len(report.values)}")
    lines.append("rep,value")
    for i, v in enumerate(report.values):
        lines.append(f"{i},{v!r}")
    lines.append(f"mean={report.mean!r}")
    lines.append(f"std={report.std!r}")
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> BootstrapReport:
    meta: dict[str, str] = {}
    values: list[float] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#") or line == "rep,value":
            continue
        if "=" in line and "," not in line:
            key, _, val = line.partition("=")
            meta[key] = val
        else:
            _, _, val = line.partition(",")
            values.append(float(val))
    if "metric" not in meta:
        raise EvaluationError("report text lacks a metric line")
    return BootstrapReport(
        metric_kind=meta["metric"],
        values=tuple(values),
        config_digest=meta.get("config_digest", ""),
    )


def bootstrap_evaluate(
    run_rep: Callable[[int, tuple, tuple], Mapping[str, object]],
    plan: SplitPlan,
    truth: Mapping[str, object],
    metric_kind: str,
    config_digest: str = "",
) -> BootstrapReport:
    """Score run_rep over every split in the plan.

    run_rep(i, train_ids, val_ids) returns predictions keyed by subject
    id; val subjects it leaves out are skipped for that repetition's
    metric.  metric_kind is "macro_f1" or "rmse".
    """
    if metric_kind == "macro_f1":
        metric = macro_f1
    elif metric_kind == "rmse":
        metric = rmse
    else:
        raise EvaluationError(f"unknown metric kind {metric_kind!r}")
    values = []
    for i, (train_ids, val_ids) in enumerate(plan.splits):
        try:
            preds = run_rep(i, train_ids, val_ids)
            covered = [s for s in val_ids if s in preds]
            if not covered:
                raise EvaluationError("no validation subject was predicted")
            values.append(
                metric([truth[s] for s in covered], [preds[s] for s in covered])
            )
        except RepetitionFailed:
            raise
        except Exception as exc:
            raise RepetitionFailed(i, exc) from exc
    return BootstrapReport(
        metric_kind=metric_kind, values=tuple(values), config_digest=config_digest
    )
