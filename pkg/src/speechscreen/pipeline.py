"""Run-directory pipeline stages.

Each stage reads the previous stage's plain-file outputs and finishes by
writing a marker file, so a run is inspectable, diff-able, and resumable:

    features/<set>/<file_key>.csv   header = feature names, one value row
    extract.ok
    candidates_<mode>.csv           ranked candidate table
    predcache_<mode>/<id>.csv       per-repetition validation predictions
    reports_<mode>/<id>.txt         bootstrap report per candidate
    models_<mode>/<id>.mdl          deployable model bundle
    train_eval_<mode>.ok
    ensemble_<mode>.json            chosen members + bundle paths
    ensemble_<mode>.ok
    predictions.csv
    report/summary.txt, report/results.json, report/figures/*.png

Every artifact is byte-deterministic given the same config and corpus;
floats are written with repr() so round-trips are exact.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .audio import read_wav
from .config import PipelineConfig
from .ensemble import (
    CandidateEntry,
    EmptyPool,
    NoVotes,
    VoteMode,
    average_vote,
    majority_vote,
    search_combination,
)
from .errors import PipelineError
from .evaluation import (
    bootstrap_evaluate,
    confusion_matrix,
    make_splits,
    parse_report,
    serialize_report,
)
from .embeddings import (
    MEAN_FEATURE_SET_ID,
    TIMES16_FEATURE_SET_ID,
    EmbeddingMode,
    WrongMode,
    concat_chunks,
    mean_pool,
    read_embedding_file,
    test_embedding,
)
from .imputation import impute_mmse
from .linguistic import (
    FLUENCY_FEATURE_SET_ID,
    LEX_FEATURE_SET_ID,
    default_animal_lexicon,
    fluency_features,
    general_features,
    load_lexicon,
    tokenize,
)
from .manifest import (
    Diagnosis,
    DatasetManifest,
    TaskKind,
    corpus_summary,
    parse_manifest,
    serialize_subjects,
)
from .models import (
    ModelFamily,
    TaskType,
    load_model,
    predict,
    predict_labels,
    save_model,
    train_forest_classifier,
    train_forest_regressor,
    train_logistic,
    train_mlp,
    train_ridge,
)
from .pauses import PAUSE_FEATURE_SET_ID, pause_descriptors
from .vad import detect_speech

MODE_CLASSIFY = "classify"
MODE_REGRESS = "regress"


class StageError(PipelineError):
    pass


class MissingStageOutput(StageError):
    pass


class MissingTranscript(PipelineError):
    def __init__(self, file_key: str):
        super().__init__(f"recording {file_key} has no transcript")
        self.file_key = file_key


class MissingEmbedding(PipelineError):
    def __init__(self, file_key: str, mode_tag: str):
        super().__init__(f"recording {file_key} has no {mode_tag} embedding file")
        self.file_key = file_key
        self.mode_tag = mode_tag


def _require(path: Path, hint: str) -> None:
    if not path.exists():
        raise MissingStageOutput(f"{path.name} missing; run `{hint}` first")


def load_run_manifest(cfg: PipelineConfig) -> DatasetManifest:
    try:
        subjects = cfg.subjects_path.read_text(encoding="utf-8")
        recordings = cfg.recordings_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise StageError(f"cannot read manifest: {exc}") from exc
    return parse_manifest(subjects, recordings)


def _load_lexicon(cfg: PipelineConfig):
    if cfg.lexicon_path is None:
        return default_animal_lexicon()
    return load_lexicon(cfg.lexicon_path.read_text(encoding="utf-8"))


def _feature_path(run_dir: Path, feature_set: str, file_key: str) -> Path:
    return run_dir / "features" / feature_set / f"{file_key}.csv"


def _write_feature_csv(path: Path, fv) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    header = ",".join(fv.names)
    row = ",".join(repr(float(v)) for v in fv.values)
    path.write_text(header + "\n" + row + "\n", encoding="utf-8")


def _read_feature_csv(path: Path):
    lines = path.read_text(encoding="utf-8").splitlines()
    names = tuple(lines[0].split(","))
    values = np.array([float(v) for v in lines[1].split(",")], dtype=np.float64)
    return names, values


_AUDIO_SETS = {PAUSE_FEATURE_SET_ID, MEAN_FEATURE_SET_ID, TIMES16_FEATURE_SET_ID}
_TEXT_SETS = {LEX_FEATURE_SET_ID, FLUENCY_FEATURE_SET_ID}


def _embedding_for(cfg: PipelineConfig, entry, audio, mode: EmbeddingMode):
    if cfg.embedding_provider == "test":
        return test_embedding(
            audio, cfg.embedding_dim, mode, cfg.embedding_seed, cfg.embedding_noise
        )
    path = cfg.embeddings_dir / f"{entry.file_key}.{mode.file_tag}.emb"
    if not path.is_file():
        raise MissingEmbedding(entry.file_key, mode.file_tag)
    emb = read_embedding_file(path.read_bytes())
    if emb.mode is not mode:
        raise WrongMode(f"{path.name}: {emb.mode.file_tag} data in a {mode.file_tag} slot")
    return emb


def extract_features(cfg: PipelineConfig, run_dir: Path) -> dict:
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    manifest = load_run_manifest(cfg)
    lexicon = _load_lexicon(cfg) if _TEXT_SETS & set(cfg.feature_sets) else None
    base = cfg.recordings_path.parent
    need_audio = bool(_AUDIO_SETS & set(cfg.feature_sets))

    entries = sorted(
        (e for e in manifest.recordings if e.variant == cfg.variant),
        key=lambda e: e.file_key,
    )
    written = 0
    for entry in entries:
        audio = None
        if need_audio:
            audio_path = base / entry.audio_path
            if not audio_path.is_file():
                raise StageError(f"{entry.file_key}: audio file {audio_path} missing")
            audio = read_wav(audio_path.read_bytes())
        text = None
        if lexicon is not None:
            if entry.transcript_path is None:
                raise MissingTranscript(entry.file_key)
            text_path = base / entry.transcript_path
            if not text_path.is_file():
                raise MissingTranscript(entry.file_key)
            text = text_path.read_text(encoding="utf-8")
        try:
            for fs in cfg.feature_sets:
                if fs == PAUSE_FEATURE_SET_ID:
                    energies = frame_energies_of(cfg, audio)
                    segments = detect_speech(energies, cfg.vad)
                    total = audio.duration_s
                    if segments and segments[-1].end_s > total:
                        total = segments[-1].end_s
                    fv = pause_descriptors(segments, total).to_feature_vector()
                elif fs == LEX_FEATURE_SET_ID:
                    fv = general_features(text)
                elif fs == FLUENCY_FEATURE_SET_ID:
                    fv = fluency_features(tokenize(text), lexicon)
                elif fs == MEAN_FEATURE_SET_ID:
                    fv = mean_pool(
                        _embedding_for(cfg, entry, audio, EmbeddingMode.SEG30)
                    )
                elif fs == TIMES16_FEATURE_SET_ID:
                    fv = concat_chunks(
                        _embedding_for(cfg, entry, audio, EmbeddingMode.CHUNK16)
                    )
                else:
                    raise StageError(f"no extractor for feature set {fs!r}")
                _write_feature_csv(_feature_path(run_dir, fs, entry.file_key), fv)
                written += 1
        except (MissingTranscript, MissingEmbedding, StageError):
            raise
        except PipelineError as exc:
            raise StageError(f"{entry.file_key}: {exc}") from exc

    (run_dir / "extract.ok").write_text(
        f"digest={cfg.digest}\nvariant={cfg.variant.value}\n"
        f"recordings={len(entries)}\nfiles={written}\n",
        encoding="utf-8",
    )
    return {"recordings": len(entries), "files": written}


def frame_energies_of(cfg: PipelineConfig, audio):
    from .audio import frame_energies

    return frame_energies(audio, cfg.frame_ms, cfg.hop_ms)


def _feature_table(run_dir, manifest, cfg, feature_set, task):
    """Rows for every labeled subject that has this (task, variant)
    recording, subject-id sorted."""
    ids, rows = [], []
    for s in sorted(manifest.labeled_subjects(), key=lambda s: s.subject_id):
        entry = manifest.recording(s.subject_id, task, cfg.variant)
        if entry is None:
            continue
        path = _feature_path(run_dir, feature_set, entry.file_key)
        if not path.is_file():
            raise MissingStageOutput(
                f"feature file {path.name} missing; run `extract` first"
            )
        _, values = _read_feature_csv(path)
        ids.append(s.subject_id)
        rows.append(values)
    return ids, (np.vstack(rows) if rows else np.zeros((0, 0)))


def _candidate_seed(cfg: PipelineConfig, fs: str, task: TaskKind, family: ModelFamily) -> int:
    import hashlib

    key = f"{cfg.split_seed}:{fs}:{task.value}:{family.value}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little") >> 1


def _fit_one(cfg, mode, family, X_tr, y_tr, X_va, y_va, seed):
    if mode == MODE_CLASSIFY:
        if family is ModelFamily.logistic:
            return train_logistic(X_tr, y_tr, cfg.logistic, seed=seed)
        if family is ModelFamily.forest:
            return train_forest_classifier(X_tr, y_tr, cfg.forest, seed=seed)
        if family is ModelFamily.mlp:
            return train_mlp(
                X_tr, y_tr, X_va, y_va, TaskType.classify3, cfg.mlp, seed=seed
            )
        raise StageError(f"{family.value} cannot classify")
    if family is ModelFamily.ridge:
        return train_ridge(X_tr, y_tr, cfg.ridge_l2, seed=seed)
    if family is ModelFamily.forest:
        return train_forest_regressor(X_tr, y_tr, cfg.forest, seed=seed)
    if family is ModelFamily.mlp:
        return train_mlp(X_tr, y_tr, X_va, y_va, TaskType.regress, cfg.mlp, seed=seed)
    raise StageError(f"{family.value} cannot regress")


def _candidate_worker(payload: dict) -> dict:
    """Bootstrap-evaluate one (feature_set, task, family) triple and fit
    its deployable model.  Shaped for a process pool: plain dict in,
    plain dict out."""
    cfg = payload["cfg"]
    mode = payload["mode"]
    fs, task, family = payload["triple"]
    plan = payload["plan"]
    ids = payload["ids"]
    X = payload["X"]
    truth = payload["truth"]
    classify = mode == MODE_CLASSIFY

    index = {sid: i for i, sid in enumerate(ids)}
    y = np.array(
        [int(truth[s]) if classify else float(truth[s]) for s in ids],
        dtype=np.int64 if classify else np.float64,
    )
    cand_seed = _candidate_seed(cfg, fs, task, family)
    rep_preds = []

    def run_rep(i, train_ids, val_ids):
        tr = [index[s] for s in train_ids if s in index]
        va = [index[s] for s in val_ids if s in index]
        preds: dict = {}
        if tr and va:
            seed = int(np.random.SeedSequence([cand_seed, i]).generate_state(1)[0])
            model = _fit_one(cfg, mode, family, X[tr], y[tr], X[va], y[va], seed)
            if classify:
                out = predict_labels(model, X[va])
                preds = {ids[r]: Diagnosis(int(p)) for r, p in zip(va, out)}
            else:
                out = predict(model, X[va])
                preds = {ids[r]: float(p) for r, p in zip(va, out)}
        rep_preds.append(preds)
        return preds

    report = bootstrap_evaluate(
        run_rep,
        plan,
        truth,
        "macro_f1" if classify else "rmse",
        cfg.digest,
    )
    val_metric = report.mean if classify else -report.mean

    # deployable model: all rows for closed-form/bagged learners, the
    # first repetition's split for the checkpoint-selected MLP
    all_rows = np.arange(len(ids))
    if family is ModelFamily.mlp:
        tr0 = [index[s] for s in plan.splits[0][0] if s in index]
        va0 = [index[s] for s in plan.splits[0][1] if s in index]
        deployed = _fit_one(cfg, mode, family, X[tr0], y[tr0], X[va0], y[va0], cand_seed)
    else:
        deployed = _fit_one(cfg, mode, family, X[all_rows], y[all_rows], None, None, cand_seed)
    deployed = replace(deployed, config_digest=cfg.digest)

    return {
        "triple": (fs, task, family),
        "n_subjects": len(ids),
        "seed": cand_seed,
        "report": report,
        "val_metric": val_metric,
        "rep_preds": rep_preds,
        "bundle": save_model(deployed),
    }


def train_eval(cfg: PipelineConfig, run_dir: Path, mode: str, jobs: int = 1) -> dict:
    run_dir = Path(run_dir)
    _require(run_dir / "extract.ok", "extract")
    if mode not in (MODE_CLASSIFY, MODE_REGRESS):
        raise StageError(f"unknown mode {mode!r}")
    classify = mode == MODE_CLASSIFY
    manifest = load_run_manifest(cfg)
    labeled = manifest.labeled_subjects()

    if classify:
        truth = {s.subject_id: s.diagnosis for s in labeled}
    else:
        imputed = impute_mmse(labeled)
        truth = {i.record.subject_id: float(i.record.mmse) for i in imputed}
        flags = {i.record.subject_id: i.imputed for i in imputed}
        merged = [
            next(i.record for i in imputed if i.record.subject_id == s.subject_id)
            if s.subject_id in truth
            else s
            for s in manifest.subjects
        ]
        (run_dir / "subjects_imputed.csv").write_text(
            serialize_subjects(
                merged, [flags.get(s.subject_id, False) for s in manifest.subjects]
            ),
            encoding="utf-8",
        )

    plan = make_splits(
        [(s.subject_id, s.diagnosis) for s in labeled],
        cfg.split_seed,
        cfg.split_repetitions,
        cfg.train_fraction,
    )

    triples = cfg.candidates_classify if classify else cfg.candidates_regress
    payloads = []
    for fs, task, family in triples:
        if fs not in cfg.feature_sets:
            continue
        ids, X = _feature_table(run_dir, manifest, cfg, fs, task)
        if not ids:
            continue
        payloads.append(
            {
                "cfg": cfg,
                "mode": mode,
                "triple": (fs, task, family),
                "plan": plan,
                "ids": ids,
                "X": X,
                "truth": truth,
            }
        )
    if not payloads:
        raise EmptyPool("no usable candidate triples (check feature_sets)")

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_candidate_worker, payloads))
    else:
        results = [_candidate_worker(p) for p in payloads]

    results.sort(
        key=lambda r: (
            -r["val_metric"],
            r["triple"][0],
            r["triple"][1].value,
            r["triple"][2].value,
        )
    )
    prefix = "A" if classify else "M"
    for rank, r in enumerate(results):
        r["model_id"] = f"{prefix}{rank + 1}"

    pred_dir = run_dir / f"predcache_{mode}"
    report_dir = run_dir / f"reports_{mode}"
    model_dir = run_dir / f"models_{mode}"
    for d in (pred_dir, report_dir, model_dir):
        d.mkdir(parents=True, exist_ok=True)

    table = ["model_id,feature_set,task,family,val_metric,n_subjects,seed"]
    for r in results:
        fs, task, family = r["triple"]
        table.append(
            f"{r['model_id']},{fs},{task.value},{family.value},"
            f"{r['val_metric']!r},{r['n_subjects']},{r['seed']}"
        )
        lines = ["rep,subject_id,value"]
        for i, preds in enumerate(r["rep_preds"]):
            for sid in sorted(preds):
                v = preds[sid]
                lines.append(
                    f"{i},{sid},{v.name if classify else repr(v)}"
                )
        (pred_dir / f"{r['model_id']}.csv").write_text(
            "\n".join(lines) + "\n", encoding="utf-8"
        )
        (report_dir / f"{r['model_id']}.txt").write_text(
            serialize_report(r["report"]), encoding="utf-8"
        )
        (model_dir / f"{r['model_id']}.mdl").write_bytes(r["bundle"])
    (run_dir / f"candidates_{mode}.csv").write_text(
        "\n".join(table) + "\n", encoding="utf-8"
    )
    (run_dir / f"train_eval_{mode}.ok").write_text(
        f"digest={cfg.digest}\ncandidates={len(results)}\n", encoding="utf-8"
    )
    return {"candidates": len(results), "best": results[0]["model_id"]}


def _read_candidates(run_dir: Path, mode: str) -> list[dict]:
    lines = (run_dir / f"candidates_{mode}.csv").read_text(encoding="utf-8").splitlines()
    out = []
    for line in lines[1:]:
        model_id, fs, task, family, metric, n_subjects, seed = line.split(",")
        out.append(
            {
                "model_id": model_id,
                "feature_set": fs,
                "task": TaskKind(task),
                "family": ModelFamily(family),
                "val_metric": float(metric),
                "n_subjects": int(n_subjects),
                "seed": int(seed),
            }
        )
    return out


def _read_predcache(run_dir: Path, mode: str, model_id: str, reps: int) -> tuple:
    lines = (
        (run_dir / f"predcache_{mode}" / f"{model_id}.csv")
        .read_text(encoding="utf-8")
        .splitlines()
    )
    per_rep: list[dict] = [dict() for _ in range(reps)]
    for line in lines[1:]:
        rep, sid, value = line.split(",")
        per_rep[int(rep)][sid] = (
            Diagnosis[value] if mode == MODE_CLASSIFY else float(value)
        )
    return tuple(per_rep)


def _truth_for(cfg: PipelineConfig, manifest: DatasetManifest, mode: str) -> dict:
    labeled = manifest.labeled_subjects()
    if mode == MODE_CLASSIFY:
        return {s.subject_id: s.diagnosis for s in labeled}
    return {
        i.record.subject_id: float(i.record.mmse) for i in impute_mmse(labeled)
    }


def _candidate_pool(cfg, run_dir, mode) -> list[CandidateEntry]:
    rows = _read_candidates(run_dir, mode)
    return [
        CandidateEntry(
            model_id=row["model_id"],
            feature_set_id=row["feature_set"],
            task=row["task"],
            family=row["family"],
            val_metric=row["val_metric"],
            rep_val_predictions=_read_predcache(
                run_dir, mode, row["model_id"], cfg.split_repetitions
            ),
        )
        for row in rows
    ]


def ensemble_stage(cfg: PipelineConfig, run_dir: Path, mode: str) -> dict:
    run_dir = Path(run_dir)
    _require(run_dir / f"train_eval_{mode}.ok", f"train-eval --mode {mode}")
    manifest = load_run_manifest(cfg)
    pool = _candidate_pool(cfg, run_dir, mode)
    truth = _truth_for(cfg, manifest, mode)
    vote_mode = VoteMode.majority if mode == MODE_CLASSIFY else VoteMode.average
    spec, report = search_combination(
        pool,
        truth,
        vote_mode,
        max_pool=cfg.ensemble_max_pool,
        min_size=cfg.ensemble_min_size,
        config_digest=cfg.digest,
    )
    doc = {
        "mode": vote_mode.value,
        "members": list(spec.member_ids),
        "bundles": {
            m: f"models_{mode}/{m}.mdl" for m in spec.member_ids
        },
        "metric": report.metric_kind,
        "mean": report.mean,
        "std": report.std,
        "config_digest": cfg.digest,
        "tie_rule": 1,
    }
    (run_dir / f"ensemble_{mode}.json").write_text(
        json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    (run_dir / f"reports_{mode}" / "ensemble.txt").write_text(
        serialize_report(report), encoding="utf-8"
    )
    (run_dir / f"ensemble_{mode}.ok").write_text(
        f"digest={cfg.digest}\nmembers={'+'.join(spec.member_ids)}\n",
        encoding="utf-8",
    )
    return {"members": list(spec.member_ids), "mean": report.mean}


def _load_members(cfg, run_dir, mode):
    doc = json.loads((run_dir / f"ensemble_{mode}.json").read_text(encoding="utf-8"))
    by_id = {row["model_id"]: row for row in _read_candidates(run_dir, mode)}
    members = []
    for mid in doc["members"]:
        row = by_id[mid]
        model = load_model((run_dir / doc["bundles"][mid]).read_bytes())
        members.append((mid, row["feature_set"], row["task"], model))
    return members


def predict_stage(cfg: PipelineConfig, run_dir: Path) -> dict:
    run_dir = Path(run_dir)
    _require(run_dir / "extract.ok", "extract")
    manifest = load_run_manifest(cfg)
    have_classify = (run_dir / f"ensemble_{MODE_CLASSIFY}.json").is_file()
    have_regress = (run_dir / f"ensemble_{MODE_REGRESS}.json").is_file()
    if not have_classify and not have_regress:
        raise MissingStageOutput("no ensemble has been searched; run `ensemble` first")
    clf_members = _load_members(cfg, run_dir, MODE_CLASSIFY) if have_classify else []
    reg_members = _load_members(cfg, run_dir, MODE_REGRESS) if have_regress else []

    def member_value(sid, fs, task, model, as_label):
        entry = manifest.recording(sid, task, cfg.variant)
        if entry is None:
            return None
        path = _feature_path(run_dir, fs, entry.file_key)
        if not path.is_file():
            raise MissingStageOutput(
                f"feature file {path.name} missing; run `extract` first"
            )
        _, values = _read_feature_csv(path)
        row = values[None, :]
        if as_label:
            return Diagnosis(int(predict_labels(model, row)[0]))
        return float(predict(model, row)[0])

    rows = []
    unpredicted = []
    for s in sorted(manifest.subjects, key=lambda s: s.subject_id):
        sid = s.subject_id
        label = ""
        votes_text = ""
        if clf_members:
            votes = {}
            for mid, fs, task, model in clf_members:
                v = member_value(sid, fs, task, model, as_label=True)
                if v is not None:
                    votes[mid] = v
            if votes:
                fused = majority_vote(votes, [m[0] for m in clf_members])
                label = fused.name
                counts = {d: 0 for d in Diagnosis}
                for v in votes.values():
                    counts[v] += 1
                votes_text = ";".join(f"{d.name}={counts[d]}" for d in Diagnosis)
            else:
                unpredicted.append((sid, "all classification members abstained"))
        mmse_text = ""
        if reg_members:
            values = {}
            for mid, fs, task, model in reg_members:
                v = member_value(sid, fs, task, model, as_label=False)
                if v is not None:
                    values[mid] = v
            if values:
                mmse_text = repr(average_vote(values))
            else:
                unpredicted.append((sid, "all regression members abstained"))
        rows.append(f"{sid},{label},{votes_text},{mmse_text}")

    lines = ["subject_id,diagnosis,votes,mmse"] + rows
    if unpredicted:
        lines.append("# unpredicted")
        lines.extend(f"{sid},{reason}" for sid, reason in unpredicted)
    (run_dir / "predictions.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return {"subjects": len(rows), "unpredicted": unpredicted}


def _fused_confusion(cfg, run_dir, manifest):
    """Validation confusion counts summed over repetitions for the
    chosen classification ensemble."""
    doc = json.loads(
        (run_dir / f"ensemble_{MODE_CLASSIFY}.json").read_text(encoding="utf-8")
    )
    pool = {c.model_id: c for c in _candidate_pool(cfg, run_dir, MODE_CLASSIFY)}
    members = [pool[m] for m in doc["members"]]
    ranking = doc["members"]
    truth = _truth_for(cfg, manifest, MODE_CLASSIFY)
    total = np.zeros((len(Diagnosis), len(Diagnosis)), dtype=np.int64)
    for i in range(cfg.split_repetitions):
        covered = sorted({s for m in members for s in m.rep_val_predictions[i]})
        t, p = [], []
        for sid in covered:
            votes = {
                m.model_id: m.rep_val_predictions[i][sid]
                for m in members
                if sid in m.rep_val_predictions[i]
            }
            t.append(truth[sid])
            p.append(majority_vote(votes, ranking))
        if covered:
            total += confusion_matrix(t, p)
    return total


def _text_histogram(values, bins: int = 10, width: int = 40) -> list[str]:
    lo, hi = min(values), max(values)
    if hi == lo:
        return [f"{lo!r}: all {len(values)} repetitions"]
    edges = [lo + (hi - lo) * i / bins for i in range(bins + 1)]
    counts = [0] * bins
    for v in values:
        k = min(int((v - lo) / (hi - lo) * bins), bins - 1)
        counts[k] += 1
    peak = max(counts)
    out = []
    for k in range(bins):
        bar = "#" * (round(counts[k] * width / peak) if peak else 0)
        out.append(f"  {edges[k]:.4f}-{edges[k + 1]:.4f} {counts[k]:3d} {bar}")
    return out


def report_stage(cfg: PipelineConfig, run_dir: Path) -> dict:
    run_dir = Path(run_dir)
    modes = [
        m
        for m in (MODE_CLASSIFY, MODE_REGRESS)
        if (run_dir / f"candidates_{m}.csv").is_file()
    ]
    if not modes:
        raise MissingStageOutput("no candidate tables; run `train-eval` first")
    manifest = load_run_manifest(cfg)
    summary = corpus_summary(manifest)

    report_dir = run_dir / "report"
    fig_dir = report_dir / "figures"
    fig_dir.mkdir(parents=True, exist_ok=True)

    lines = ["# screening run summary", f"config_digest={cfg.digest}", ""]
    lines.append("## corpus")
    lines.append(
        f"subjects={summary.n_subjects} recordings={summary.n_recordings} "
        f"undiagnosed={summary.undiagnosed}"
    )
    lines.append(
        " ".join(f"{d.name}={summary.per_class[d]}" for d in Diagnosis)
    )
    lines.append("")

    results: dict = {"config_digest": cfg.digest, "corpus": {
        "subjects": summary.n_subjects,
        "recordings": summary.n_recordings,
        "undiagnosed": summary.undiagnosed,
        "per_class": {d.name: summary.per_class[d] for d in Diagnosis},
    }}

    from . import figures

    for mode in modes:
        cands = _read_candidates(run_dir, mode)
        metric_name = "macro-F1" if mode == MODE_CLASSIFY else "RMSE"
        lines.append(f"## {mode} candidates (validation {metric_name})")
        lines.append("model_id  feature_set       task  family    val_mean    val_std")
        mode_doc: dict = {"candidates": []}
        bar_ids, bar_means, bar_stds = [], [], []
        for row in cands:
            rep = parse_report(
                (run_dir / f"reports_{mode}" / f"{row['model_id']}.txt").read_text(
                    encoding="utf-8"
                )
            )
            lines.append(
                f"{row['model_id']:<9} {row['feature_set']:<17} "
                f"{row['task'].value:<5} {row['family'].value:<9}"
                f"{rep.mean:>9.4f}  {rep.std:>9.4f}"
            )
            mode_doc["candidates"].append(
                {
                    "model_id": row["model_id"],
                    "feature_set": row["feature_set"],
                    "task": row["task"].value,
                    "family": row["family"].value,
                    "val_mean": rep.mean,
                    "val_std": rep.std,
                }
            )
            bar_ids.append(row["model_id"])
            bar_means.append(rep.mean)
            bar_stds.append(rep.std)
        figures.candidate_bars(
            bar_ids,
            bar_means,
            bar_stds,
            metric_name,
            fig_dir / f"candidates_{mode}.png",
        )
        lines.append("")

        ens_path = run_dir / f"ensemble_{mode}.json"
        if ens_path.is_file():
            doc = json.loads(ens_path.read_text(encoding="utf-8"))
            rep = parse_report(
                (run_dir / f"reports_{mode}" / "ensemble.txt").read_text(
                    encoding="utf-8"
                )
            )
            lines.append(f"## {mode} ensemble ({doc['mode']} voting)")
            lines.append(f"members={'+'.join(doc['members'])}")
            lines.append(f"{rep.metric_kind} mean={rep.mean!r} std={rep.std!r}")
            lines.append("per-repetition distribution:")
            lines.extend(_text_histogram(rep.values))
            figures.metric_histogram(
                rep.values,
                f"{mode} ensemble {rep.metric_kind} over repetitions",
                fig_dir / f"ensemble_{mode}_hist.png",
            )
            mode_doc["ensemble"] = {
                "members": doc["members"],
                "metric": rep.metric_kind,
                "mean": rep.mean,
                "std": rep.std,
                "values": list(rep.values),
            }
            if mode == MODE_CLASSIFY:
                conf = _fused_confusion(cfg, run_dir, manifest)
                lines.append("validation confusion (rows true, cols predicted):")
                header = "        " + "".join(f"{d.name:>10}" for d in Diagnosis)
                lines.append(header)
                for d in Diagnosis:
                    lines.append(
                        f"{d.name:<8}"
                        + "".join(f"{int(conf[d, c]):>10}" for c in Diagnosis)
                    )
                figures.confusion_figure(conf, fig_dir / "confusion.png")
                mode_doc["ensemble"]["confusion"] = conf.tolist()
            lines.append("")
        results[mode] = mode_doc

    (report_dir / "summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (report_dir / "results.json").write_text(
        json.dumps(results, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return {"summary": str(report_dir / "summary.txt")}
