"""Energy-threshold voice activity detection with duration smoothing.

Frame activity uses a peak-relative dB threshold so the decision is invariant
to recording gain. Post-processing runs in a fixed order: merge short gaps
first, then discard short segments, so a long utterance split by a micro-pause
is not thrown away as two short bursts.

All interval arithmetic is done in integer milliseconds (frame index times
hop_ms) and converted to seconds once at the end; this keeps the output free
of float accumulation artifacts and exactly reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .audio import EnergySeries


@dataclass(frozen=True)
class VadConfig:
    threshold_db_below_peak: float = 30.0
    min_speech_ms: int = 100
    min_pause_ms: int = 250
    silence_floor: float = 1e-10  # guards log of zero

    def __post_init__(self):
        if self.threshold_db_below_peak <= 0:
            raise ValueError("threshold_db_below_peak must be > 0")
        if self.min_speech_ms < 0 or self.min_pause_ms < 0:
            raise ValueError("durations must be >= 0")
        if self.silence_floor <= 0:
            raise ValueError("silence_floor must be > 0")


@dataclass(frozen=True)
class SpeechSegment:
    start_s: float
    end_s: float

    def __post_init__(self):
        if not (0 <= self.start_s < self.end_s):
            raise ValueError(f"bad segment [{self.start_s}, {self.end_s}]")

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


def detect_speech(energies: EnergySeries, config: VadConfig = VadConfig()) -> list:
    """Detect speech segments from a frame energy series.

    Steps, in order:
      1. frame k is active iff its dB level is strictly above peak - threshold
         (levels computed as 10*log10(max(energy, silence_floor)));
      2. consecutive active frames form runs spanning
         [first*hop_ms, last*hop_ms + frame_ms];
      3. runs separated by a gap shorter than min_pause_ms (or overlapping,
         which happens when frame > 2*hop) are merged;
      4. merged runs shorter than min_speech_ms are discarded.

    An all-silent series yields [] because no frame is strictly above the
    floor-level threshold.
    """
    e = np.asarray(energies.energies, dtype=np.float64)
    floor = config.silence_floor
    if float(e.max()) <= floor:
        # all-silent input: with the peak itself at the floor, the relative
        # threshold would mark every frame active, which is the one case the
        # peak-relative rule cannot express
        return []
    peak_db = 10.0 * math.log10(max(float(e.max()), floor))
    level_db = 10.0 * np.log10(np.maximum(e, floor))
    active = level_db > peak_db - config.threshold_db_below_peak

    frame_ms, hop_ms = energies.frame_ms, energies.hop_ms
    runs = []  # [start_ms, end_ms] per run of consecutive active frames
    k = 0
    n = len(active)
    while k < n:
        if active[k]:
            first = k
            while k + 1 < n and active[k + 1]:
                k += 1
            runs.append([first * hop_ms, k * hop_ms + frame_ms])
        k += 1

    merged = []
    for run in runs:
        if merged and (run[0] - merged[-1][1] < config.min_pause_ms or run[0] <= merged[-1][1]):
            merged[-1][1] = run[1]
        else:
            merged.append(run)

    return [
        SpeechSegment(start_s=s / 1000.0, end_s=t / 1000.0)
        for s, t in merged
        if t - s >= config.min_speech_ms
    ]
