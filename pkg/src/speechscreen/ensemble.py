"""Late fusion of per-(feature, task) models and the pool search.

Classification fuses hard labels by majority vote; a count tie goes to
the class backed by the strongest standalone member.  Regression
averages member outputs and clamps to the score range.  The search
scores every subset of the strongest max_pool candidates on the same
splits the members were validated on, so fusion is a cheap lookup over
cached predictions rather than a refit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import PipelineError
from .evaluation import BootstrapReport, macro_f1, rmse
from .manifest import MMSE_MAX, MMSE_MIN, Diagnosis, TaskKind
from .models import ModelFamily, TrainedModel


class EnsembleError(PipelineError):
    pass


class NoVotes(EnsembleError):
    pass


class EmptyPool(EnsembleError):
    pass


class VoteMode(Enum):
    majority = "majority"
    average = "average"


@dataclass(frozen=True)
class CandidateEntry:
    """One trained candidate plus its standalone validation score.

    rep_val_predictions[i] maps subject id to that repetition's
    prediction; subjects the candidate abstained on are absent.
    """

    model_id: str
    feature_set_id: str
    task: TaskKind
    family: ModelFamily
    val_metric: float  # higher is better (regression candidates carry -rmse)
    rep_val_predictions: Optional[tuple] = None
    trained: Optional[TrainedModel] = None

    def __post_init__(self):
        if not math.isfinite(self.val_metric):
            raise EnsembleError(f"candidate {self.model_id}: non-finite val metric")


@dataclass(frozen=True)
class EnsembleSpec:
    """Chosen members in rank order (strongest standalone first)."""

    member_ids: tuple
    mode: VoteMode

    def __post_init__(self):
        if not self.member_ids:
            raise EnsembleError("an ensemble needs at least one member")
        if len(set(self.member_ids)) != len(self.member_ids):
            raise EnsembleError("duplicate member ids")


def rank_candidates(pool: Sequence[CandidateEntry]) -> list[CandidateEntry]:
    """Standalone score descending; id breaks exact ties."""
    return sorted(pool, key=lambda c: (-c.val_metric, c.model_id))


def majority_vote(
    per_member_labels: Mapping[str, Diagnosis], ranking: Sequence[str]
) -> Diagnosis:
    """Label with the strictly highest count wins; on a count tie, walk
    the ranking best to worst and return the first ranked member's label
    that belongs to the tied set.  Members absent from the map abstain.
    """
    if not per_member_labels:
        raise NoVotes("every member abstained")
    counts: dict[Diagnosis, int] = {}
    for v in per_member_labels.values():
        counts[v] = counts.get(v, 0) + 1
    top = max(counts.values())
    tied = {c for c, n in counts.items() if n == top}
    if len(tied) == 1:
        return next(iter(tied))
    for member in ranking:
        label = per_member_labels.get(member)
        if label in tied:
            return label
    # labels can only come from ranked members, so the walk always hits
    raise NoVotes("tie among members outside the ranking")


def average_vote(per_member_values: Mapping[str, float]) -> float:
    if not per_member_values:
        raise NoVotes("every member abstained")
    mean = float(np.mean([float(v) for v in per_member_values.values()]))
    return min(float(MMSE_MAX), max(float(MMSE_MIN), mean))


def fuse(per_member: Mapping[str, object], ranking: Sequence[str], mode: VoteMode):
    if mode is VoteMode.majority:
        return majority_vote(per_member, ranking)
    return average_vote(per_member)


def _subset_values(members, mode, truth):
    """Per-repetition fused metric for one member subset, or None when
    some repetition has no covered subject at all."""
    ranking = [m.model_id for m in members]
    reps = len(members[0].rep_val_predictions)
    values = []
    for i in range(reps):
        covered = sorted({s for m in members for s in m.rep_val_predictions[i]})
        if not covered:
            return None
        preds = {}
        for sid in covered:
            votes = {
                m.model_id: m.rep_val_predictions[i][sid]
                for m in members
                if sid in m.rep_val_predictions[i]
            }
            preds[sid] = fuse(votes, ranking, mode)
        t = [truth[s] for s in covered]
        p = [preds[s] for s in covered]
        values.append(macro_f1(t, p) if mode is VoteMode.majority else rmse(t, p))
    return values


def search_combination(
    pool: Sequence[CandidateEntry],
    truth: Mapping[str, object],
    mode: VoteMode,
    max_pool: int = 8,
    min_size: int = 1,
    config_digest: str = "",
) -> tuple[EnsembleSpec, BootstrapReport]:
    """Exhaustive subset search over the top max_pool candidates.

    Best mean metric wins; exact ties prefer fewer members, then the
    lexicographically smallest sorted id tuple, so the result is stable
    under pool reordering.
    """
    if not pool:
        raise EmptyPool("no candidates to search")
    ids = [c.model_id for c in pool]
    if len(set(ids)) != len(ids):
        raise EnsembleError("duplicate model ids in pool")
    for c in pool:
        if c.rep_val_predictions is None:
            raise EnsembleError(f"candidate {c.model_id} lacks cached predictions")
    reps = {len(c.rep_val_predictions) for c in pool}
    if len(reps) != 1:
        raise EnsembleError(f"candidates disagree on repetition count: {sorted(reps)}")

    ranked = rank_candidates(pool)[:max_pool]
    best = None  # (key, members, values)
    for size in range(min_size, len(ranked) + 1):
        for members in combinations(ranked, size):
            values = _subset_values(members, mode, truth)
            if values is None:
                continue
            mean = float(np.mean(values))
            score = mean if mode is VoteMode.majority else -mean
            key = (-score, len(members), tuple(sorted(m.model_id for m in members)))
            if best is None or key < best[0]:
                best = (key, members, values)
    if best is None:
        raise NoVotes("every candidate subset left some repetition unpredicted")

    _, members, values = best
    spec = EnsembleSpec(member_ids=tuple(m.model_id for m in members), mode=mode)
    report = BootstrapReport(
        metric_kind="macro_f1" if mode is VoteMode.majority else "rmse",
        values=tuple(values),
        config_digest=config_digest,
    )
    return spec, report
