"""Shared fixtures.

The expensive full-pipeline fixtures are session-scoped so the CLI and
pipeline suites reuse one small run instead of re-training per test.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from speechscreen.audio import SAMPLE_RATE, AudioBuffer
from speechscreen.synth import SynthConfig, synth_corpus, write_corpus


def make_audio(samples) -> AudioBuffer:
    return AudioBuffer(samples=np.asarray(samples, dtype=np.float64))


def tone(duration_s: float, freq: float = 220.0, amp: float = 0.25) -> np.ndarray:
    t = np.arange(int(duration_s * SAMPLE_RATE)) / SAMPLE_RATE
    return amp * np.sin(2 * np.pi * freq * t)


@pytest.fixture
def audio_factory():
    return make_audio


# small-but-complete config used by the pipeline and CLI suites; model sizes
# are cut down so the whole session run stays in seconds
SMALL_OVERRIDES = {
    "embedding": {"dim": 6},
    "splits": {"repetitions": 6},
    "models": {
        "forest": {"n_trees": 10},
        "mlp": {"hidden_units": 8, "epochs": 3, "n_seeds": 2},
    },
}


def write_small_corpus(root: Path, n_per_class: int = 3, seed: int = 11) -> Path:
    corpus = synth_corpus(SynthConfig(n_per_class=n_per_class, seed=seed))
    write_corpus(corpus, root)
    cfg = {
        "subjects": "subjects.csv",
        "recordings": "recordings.csv",
        **SMALL_OVERRIDES,
    }
    path = root / "config.json"
    path.write_text(json.dumps(cfg, indent=2) + "\n", encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory) -> Path:
    """Corpus dir with config.json; 9 subjects, 27 recordings."""
    root = tmp_path_factory.mktemp("corpus")
    write_small_corpus(root)
    return root


@pytest.fixture(scope="session")
def small_run(small_corpus, tmp_path_factory):
    """One full pipeline run over the small corpus: all stages, both modes."""
    from speechscreen.config import load_config
    from speechscreen.pipeline import (
        ensemble_stage,
        extract_features,
        predict_stage,
        report_stage,
        train_eval,
    )

    run_dir = tmp_path_factory.mktemp("run")
    cfg = load_config(small_corpus / "config.json")
    extract_features(cfg, run_dir)
    for mode in ("classify", "regress"):
        train_eval(cfg, run_dir, mode)
        ensemble_stage(cfg, run_dir, mode)
    predict_stage(cfg, run_dir)
    report_stage(cfg, run_dir)
    return {"config": cfg, "run_dir": run_dir, "corpus": small_corpus}
