"""JSON pipeline configuration.

Unknown keys are rejected rather than ignored so typos fail loudly.
The digest is a sha256 over the fully defaulted parameter set with
paths as written, and is stamped into every evaluation report so
results can be traced back to the exact settings that produced them.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import PipelineError
from .manifest import TaskKind, Variant
from .models import ForestConfig, LogisticConfig, MlpConfig, ModelFamily
from .vad import VadConfig


class ConfigError(PipelineError):
    pass


class UnknownKey(ConfigError):
    def __init__(self, key: str, where: str):
        super().__init__(f"unknown key {key!r} in {where}")
        self.key = key


class MissingPath(ConfigError):
    def __init__(self, path: Path):
        super().__init__(f"path does not exist: {path}")
        self.path = path


FEATURE_SET_IDS = ("pause16", "lex16", "fluency", "whisper_mean", "whisper_times16")

# (feature set, task, family) triples kept small enough to train in
# minutes on one core while still spanning every extractor and learner.
DEFAULT_CANDIDATES_CLASSIFY = (
    ("pause16", TaskKind.SFT, ModelFamily.forest),
    ("pause16", TaskKind.PFT, ModelFamily.forest),
    ("pause16", TaskKind.CTD, ModelFamily.forest),
    ("lex16", TaskKind.CTD, ModelFamily.forest),
    ("fluency", TaskKind.SFT, ModelFamily.logistic),
    ("fluency", TaskKind.PFT, ModelFamily.logistic),
    ("whisper_mean", TaskKind.SFT, ModelFamily.logistic),
    ("whisper_mean", TaskKind.PFT, ModelFamily.logistic),
    ("whisper_mean", TaskKind.CTD, ModelFamily.logistic),
    ("whisper_times16", TaskKind.SFT, ModelFamily.mlp),
    ("whisper_times16", TaskKind.CTD, ModelFamily.mlp),
)
DEFAULT_CANDIDATES_REGRESS = (
    ("pause16", TaskKind.CTD, ModelFamily.forest),
    ("pause16", TaskKind.SFT, ModelFamily.ridge),
    ("lex16", TaskKind.CTD, ModelFamily.forest),
    ("lex16", TaskKind.PFT, ModelFamily.ridge),
    ("fluency", TaskKind.SFT, ModelFamily.ridge),
    ("fluency", TaskKind.PFT, ModelFamily.ridge),
    ("whisper_mean", TaskKind.PFT, ModelFamily.ridge),
    ("whisper_mean", TaskKind.SFT, ModelFamily.forest),
    ("whisper_times16", TaskKind.PFT, ModelFamily.mlp),
    ("whisper_times16", TaskKind.CTD, ModelFamily.mlp),
)


@dataclass(frozen=True)
class PipelineConfig:
    subjects_path: Path
    recordings_path: Path
    lexicon_path: Optional[Path]
    embeddings_dir: Optional[Path]
    variant: Variant
    frame_ms: int
    hop_ms: int
    vad: VadConfig
    embedding_provider: str  # "test" | "file"
    embedding_dim: int
    embedding_seed: int
    embedding_noise: float
    feature_sets: tuple
    candidates_classify: tuple
    candidates_regress: tuple
    logistic: LogisticConfig
    ridge_l2: float
    forest: ForestConfig
    mlp: MlpConfig
    split_seed: int
    split_repetitions: int
    train_fraction: float
    ensemble_max_pool: int
    ensemble_min_size: int
    digest: str


def _check_keys(d: dict, allowed: set, where: str) -> None:
    for key in d:
        if key not in allowed:
            raise UnknownKey(key, where)


def _parse_triples(raw, where: str) -> tuple:
    out = []
    for item in raw:
        if not isinstance(item, (list, tuple)) or len(item) != 3:
            raise ConfigError(f"{where}: each candidate is [feature_set, task, family]")
        fs, task, family = item
        if fs not in FEATURE_SET_IDS:
            raise ConfigError(f"{where}: unknown feature set {fs!r}")
        try:
            out.append((fs, TaskKind(task), ModelFamily(family)))
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
    if not out:
        raise ConfigError(f"{where}: needs at least one candidate")
    return tuple(out)


def _normalized(raw: dict) -> dict:
    """Fill every default so the digest covers the whole parameter set."""
    norm = {
        "subjects": raw["subjects"],
        "recordings": raw["recordings"],
        "lexicon": raw.get("lexicon"),
        "embeddings_dir": raw.get("embeddings_dir"),
        "variant": raw.get("variant", "raw"),
        "frame_ms": raw.get("frame_ms", 25),
        "hop_ms": raw.get("hop_ms", 10),
        "vad": {
            "threshold_db_below_peak": 30.0,
            "min_speech_ms": 100,
            "min_pause_ms": 250,
            "silence_floor": 1e-10,
            **raw.get("vad", {}),
        },
        "embedding": {
            "provider": "test",
            "dim": 16,
            "seed": 7,
            "noise": 0.05,
            **raw.get("embedding", {}),
        },
        "feature_sets": list(raw.get("feature_sets", FEATURE_SET_IDS)),
        "candidates": {
            "classify": raw.get("candidates", {}).get(
                "classify",
                [[fs, t.value, f.value] for fs, t, f in DEFAULT_CANDIDATES_CLASSIFY],
            ),
            "regress": raw.get("candidates", {}).get(
                "regress",
                [[fs, t.value, f.value] for fs, t, f in DEFAULT_CANDIDATES_REGRESS],
            ),
        },
        "models": {
            "logistic": {
                "l2": 1.0,
                "step": 0.1,
                "max_iter": 500,
                "grad_tol": 1e-6,
                **raw.get("models", {}).get("logistic", {}),
            },
            "ridge_l2": raw.get("models", {}).get("ridge_l2", 1.0),
            "forest": {
                "n_trees": 100,
                "min_leaf": 1,
                "max_depth": None,
                "max_features": None,
                **raw.get("models", {}).get("forest", {}),
            },
            "mlp": {
                "hidden_units": 128,
                "step": 1e-3,
                "batch_size": 32,
                "epochs": 65,
                "n_seeds": 10,
                **raw.get("models", {}).get("mlp", {}),
            },
        },
        "splits": {
            "seed": 20,
            "repetitions": 100,
            "train_fraction": 0.75,
            **raw.get("splits", {}),
        },
        "ensemble": {"max_pool": 8, "min_size": 1, **raw.get("ensemble", {})},
    }
    return norm


_TOP_KEYS = {
    "subjects", "recordings", "lexicon", "embeddings_dir", "variant",
    "frame_ms", "hop_ms", "vad", "embedding", "feature_sets", "candidates",
    "models", "splits", "ensemble",
}


def parse_config(raw: dict, base_dir: Path) -> PipelineConfig:
    if "subjects" not in raw or "recordings" not in raw:
        raise ConfigError("config needs 'subjects' and 'recordings' paths")
    _check_keys(raw, _TOP_KEYS, "config")
    _check_keys(
        set(raw.get("vad", {})),
        {"threshold_db_below_peak", "min_speech_ms", "min_pause_ms", "silence_floor"},
        "vad",
    )
    _check_keys(set(raw.get("embedding", {})), {"provider", "dim", "seed", "noise"}, "embedding")
    _check_keys(set(raw.get("candidates", {})), {"classify", "regress"}, "candidates")
    _check_keys(
        set(raw.get("models", {})), {"logistic", "ridge_l2", "forest", "mlp"}, "models"
    )
    _check_keys(
        set(raw.get("models", {}).get("logistic", {})),
        {"l2", "step", "max_iter", "grad_tol"},
        "models.logistic",
    )
    _check_keys(
        set(raw.get("models", {}).get("forest", {})),
        {"n_trees", "min_leaf", "max_depth", "max_features"},
        "models.forest",
    )
    _check_keys(
        set(raw.get("models", {}).get("mlp", {})),
        {"hidden_units", "step", "batch_size", "epochs", "n_seeds"},
        "models.mlp",
    )
    _check_keys(
        set(raw.get("splits", {})), {"seed", "repetitions", "train_fraction"}, "splits"
    )
    _check_keys(set(raw.get("ensemble", {})), {"max_pool", "min_size"}, "ensemble")

    norm = _normalized(raw)
    digest = hashlib.sha256(
        json.dumps(norm, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()

    def path_of(value):
        return None if value is None else (base_dir / value)

    subjects = path_of(norm["subjects"])
    recordings = path_of(norm["recordings"])
    lexicon = path_of(norm["lexicon"])
    emb_dir = path_of(norm["embeddings_dir"])
    for p in (subjects, recordings, lexicon):
        if p is not None and not p.is_file():
            raise MissingPath(p)
    if emb_dir is not None and not emb_dir.is_dir():
        raise MissingPath(emb_dir)

    try:
        variant = Variant(norm["variant"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    emb = norm["embedding"]
    if emb["provider"] not in ("test", "file"):
        raise ConfigError(f"unknown embedding provider {emb['provider']!r}")
    if emb["provider"] == "file" and emb_dir is None:
        raise ConfigError("file embedding provider needs embeddings_dir")
    for fs in norm["feature_sets"]:
        if fs not in FEATURE_SET_IDS:
            raise ConfigError(f"unknown feature set {fs!r}")

    try:
        vad = VadConfig(**norm["vad"])
        logistic = LogisticConfig(**norm["models"]["logistic"])
        forest = ForestConfig(**norm["models"]["forest"])
        mlp = MlpConfig(**norm["models"]["mlp"])
    except PipelineError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    return PipelineConfig(
        subjects_path=subjects,
        recordings_path=recordings,
        lexicon_path=lexicon,
        embeddings_dir=emb_dir,
        variant=variant,
        frame_ms=int(norm["frame_ms"]),
        hop_ms=int(norm["hop_ms"]),
        vad=vad,
        embedding_provider=emb["provider"],
        embedding_dim=int(emb["dim"]),
        embedding_seed=int(emb["seed"]),
        embedding_noise=float(emb["noise"]),
        feature_sets=tuple(norm["feature_sets"]),
        candidates_classify=_parse_triples(
            norm["candidates"]["classify"], "candidates.classify"
        ),
        candidates_regress=_parse_triples(
            norm["candidates"]["regress"], "candidates.regress"
        ),
        logistic=logistic,
        ridge_l2=float(norm["models"]["ridge_l2"]),
        forest=forest,
        mlp=mlp,
        split_seed=int(norm["splits"]["seed"]),
        split_repetitions=int(norm["splits"]["repetitions"]),
        train_fraction=float(norm["splits"]["train_fraction"]),
        ensemble_max_pool=int(norm["ensemble"]["max_pool"]),
        ensemble_min_size=int(norm["ensemble"]["min_size"]),
        digest=digest,
    )


def load_config(path: Path) -> PipelineConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise MissingPath(path) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return parse_config(raw, path.parent)


def starter_config(subjects: str, recordings: str, **overrides) -> str:
    """JSON text for a minimal config pointing at a corpus."""
    doc = {"subjects": subjects, "recordings": recordings}
    doc.update(overrides)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
