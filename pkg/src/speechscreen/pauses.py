"""The 16 pause/speech-interval descriptors computed from VAD segments.

Pauses are the internal gaps between consecutive speech segments; leading and
trailing silence is excluded (recording-start silence reflects operator
behavior, not the subject). Standard deviations are population standard
deviations so n=1 needs no special case; statistics over zero items are 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import PipelineError
from .manifest import FeatureVector

PAUSE_FEATURE_SET_ID = "pause16"

PAUSE_FEATURE_NAMES = (
    "pause_count",
    "pause_total_s",
    "pause_mean_s",
    "pause_std_s",
    "pause_max_s",
    "pause_median_s",
    "pause_rate_per_min",
    "pause_speech_ratio",
    "speech_count",
    "speech_total_s",
    "speech_mean_s",
    "speech_std_s",
    "speech_max_s",
    "speech_median_s",
    "speech_rate_per_min",
    "speech_fraction",
)


class InvalidDuration(PipelineError):
    pass


@dataclass(frozen=True)
class PauseDescriptors:
    pause_count: float
    pause_total_s: float
    pause_mean_s: float
    pause_std_s: float
    pause_max_s: float
    pause_median_s: float
    pause_rate_per_min: float
    pause_speech_ratio: float
    speech_count: float
    speech_total_s: float
    speech_mean_s: float
    speech_std_s: float
    speech_max_s: float
    speech_median_s: float
    speech_rate_per_min: float
    speech_fraction: float

    def values(self) -> tuple:
        return tuple(getattr(self, name) for name in PAUSE_FEATURE_NAMES)

    def to_feature_vector(self) -> FeatureVector:
        return FeatureVector(
            feature_set_id=PAUSE_FEATURE_SET_ID,
            names=PAUSE_FEATURE_NAMES,
            values=self.values(),
        )


def _median(xs: list) -> float:
    n = len(xs)
    s = sorted(xs)
    if n % 2 == 1:
        return s[n // 2]
    return (s[n // 2 - 1] + s[n // 2]) / 2.0


def _block(durations: list, total_duration_s: float) -> tuple:
    """(count, total, mean, std, max, median, rate_per_min) with 0 defaults."""
    n = len(durations)
    if n == 0:
        return (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    total = sum(durations)
    mean = total / n
    var = sum((d - mean) ** 2 for d in durations) / n
    return (
        float(n),
        total,
        mean,
        math.sqrt(var),
        max(durations),
        _median(durations),
        n / (total_duration_s / 60.0),
    )


def pause_descriptors(segments: list, total_duration_s: float) -> PauseDescriptors:
    """Compute the 16-descriptor block from sorted, non-overlapping segments."""
    if total_duration_s <= 0:
        raise InvalidDuration(f"total_duration_s must be > 0, got {total_duration_s}")
    for a, b in zip(segments, segments[1:]):
        if b.start_s <= a.end_s:
            raise ValueError("segments must be sorted and non-overlapping")
    if segments and segments[-1].end_s > total_duration_s:
        raise ValueError("total_duration_s shorter than the last segment end")

    speech_durs = [s.duration_s for s in segments]
    gaps = [b.start_s - a.end_s for a, b in zip(segments, segments[1:])]

    p_count, p_total, p_mean, p_std, p_max, p_median, p_rate = _block(gaps, total_duration_s)
    s_count, s_total, s_mean, s_std, s_max, s_median, s_rate = _block(
        speech_durs, total_duration_s
    )
    return PauseDescriptors(
        pause_count=p_count,
        pause_total_s=p_total,
        pause_mean_s=p_mean,
        pause_std_s=p_std,
        pause_max_s=p_max,
        pause_median_s=p_median,
        pause_rate_per_min=p_rate,
        pause_speech_ratio=p_total / s_total if s_total > 0 else 0.0,
        speech_count=s_count,
        speech_total_s=s_total,
        speech_mean_s=s_mean,
        speech_std_s=s_std,
        speech_max_s=s_max,
        speech_median_s=s_median,
        speech_rate_per_min=s_rate,
        speech_fraction=s_total / total_duration_s,
    )
