"""Command-line entry point.

Exit codes: 0 success, 1 domain error (a JSON error record goes to
stderr), 2 usage error (argparse).  Flag overrides are merged into the
raw config before parsing so the config digest always reflects what
actually ran.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import pipeline
from .config import parse_config
from .embeddings import read_embedding_file
from .errors import PipelineError
from .manifest import parse_recordings
from .synth import SynthConfig, synth_corpus, write_corpus


def _load_config(path: str, seed=None, feature_sets=None):
    p = Path(path)
    try:
        raw = json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise PipelineError(f"cannot read config {p}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise PipelineError(f"{p}: {exc}") from exc
    if not isinstance(raw, dict):
        raise PipelineError(f"{p}: top level must be an object")
    if seed is not None:
        raw.setdefault("splits", {})["seed"] = seed
    if feature_sets is not None:
        raw["feature_sets"] = feature_sets
    return parse_config(raw, p.parent)


def _add_common(sub, run_dir=True):
    sub.add_argument("--config", required=True, help="pipeline config JSON")
    if run_dir:
        sub.add_argument("--run-dir", required=True, help="stage output directory")
    sub.add_argument("--seed", type=int, default=None, help="override split seed")
    sub.add_argument(
        "--feature-sets",
        default=None,
        help="comma-separated feature set ids to enable",
    )
    sub.add_argument("--jobs", type=int, default=1, help="worker processes")


def _cfg_from(args):
    fs = args.feature_sets.split(",") if args.feature_sets else None
    return _load_config(args.config, seed=args.seed, feature_sets=fs)


def cmd_extract(args) -> int:
    cfg = _cfg_from(args)
    stats = pipeline.extract_features(cfg, Path(args.run_dir))
    print(
        f"extracted {stats['files']} feature files "
        f"from {stats['recordings']} recordings"
    )
    return 0


def cmd_train_eval(args) -> int:
    cfg = _cfg_from(args)
    modes = (
        [args.mode]
        if args.mode
        else [pipeline.MODE_CLASSIFY, pipeline.MODE_REGRESS]
    )
    for mode in modes:
        stats = pipeline.train_eval(cfg, Path(args.run_dir), mode, jobs=args.jobs)
        print(f"{mode}: {stats['candidates']} candidates, best {stats['best']}")
    return 0


def cmd_ensemble(args) -> int:
    cfg = _cfg_from(args)
    modes = (
        [args.mode]
        if args.mode
        else [pipeline.MODE_CLASSIFY, pipeline.MODE_REGRESS]
    )
    for mode in modes:
        stats = pipeline.ensemble_stage(cfg, Path(args.run_dir), mode)
        print(
            f"{mode}: members {'+'.join(stats['members'])} "
            f"mean {stats['mean']:.4f}"
        )
    return 0


def cmd_predict(args) -> int:
    cfg = _cfg_from(args)
    stats = pipeline.predict_stage(cfg, Path(args.run_dir))
    print(f"predicted {stats['subjects']} subjects")
    if stats["unpredicted"]:
        record = {
            "error": "UnpredictedSubjects",
            "detail": f"{len(stats['unpredicted'])} subject/mode pairs had no votes",
            "subjects": [list(u) for u in stats["unpredicted"]],
        }
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return 1
    return 0


def cmd_report(args) -> int:
    cfg = _cfg_from(args)
    stats = pipeline.report_stage(cfg, Path(args.run_dir))
    print(f"wrote {stats['summary']}")
    return 0


def cmd_synth(args) -> int:
    corpus = synth_corpus(
        SynthConfig(n_per_class=args.subjects_per_class, seed=args.seed)
    )
    out = Path(args.out)
    write_corpus(corpus, out)
    config_path = out / "config.json"
    doc = {"subjects": "subjects.csv", "recordings": "recordings.csv"}
    config_path.write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    n = len(corpus.manifest.subjects)
    print(f"wrote {n} subjects, {len(corpus.manifest.recordings)} recordings to {out}")
    print(f"starter config: {config_path}")
    return 0


def cmd_export_check(args) -> int:
    emb_dir = Path(args.dir)
    if not emb_dir.is_dir():
        raise PipelineError(f"not a directory: {emb_dir}")
    failures = []
    for path in sorted(emb_dir.glob("*.emb")):
        try:
            emb = read_embedding_file(path.read_bytes())
            print(f"{path.name} mode={emb.mode.file_tag} rows={emb.rows} dim={emb.dim} OK")
        except PipelineError as exc:
            failures.append((path.name, exc))
            print(f"{path.name} FAIL {type(exc).__name__}: {exc}")
    if args.recordings:
        text = Path(args.recordings).read_text(encoding="utf-8")
        for entry in parse_recordings(text):
            for tag in ("seg30", "chunk16"):
                want = emb_dir / f"{entry.file_key}.{tag}.emb"
                if not want.is_file():
                    failures.append((want.name, PipelineError("missing")))
                    print(f"{want.name} FAIL missing")
    if failures:
        record = {
            "error": "ExportCheckFailed",
            "detail": f"{len(failures)} embedding files failed validation",
            "files": sorted(name for name, _ in failures),
        }
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="speechscreen",
        description="speech-based cognitive screening pipeline",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("extract", help="compute feature files per recording")
    _add_common(s)
    s.set_defaults(fn=cmd_extract)

    s = subs.add_parser("train-eval", help="train and evaluate all candidates")
    _add_common(s)
    s.add_argument("--mode", choices=["classify", "regress"], default=None)
    s.set_defaults(fn=cmd_train_eval)

    s = subs.add_parser("ensemble", help="search the best voting combination")
    _add_common(s)
    s.add_argument("--mode", choices=["classify", "regress"], default=None)
    s.set_defaults(fn=cmd_ensemble)

    s = subs.add_parser("predict", help="fuse member models over all subjects")
    _add_common(s)
    s.set_defaults(fn=cmd_predict)

    s = subs.add_parser("report", help="render summary, results document, figures")
    _add_common(s)
    s.set_defaults(fn=cmd_report)

    s = subs.add_parser("synth", help="generate a synthetic labeled corpus")
    s.add_argument("--out", required=True, help="corpus output directory")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--subjects-per-class", type=int, default=20)
    s.set_defaults(fn=cmd_synth)

    s = subs.add_parser("export-check", help="validate embedding files")
    s.add_argument("--dir", required=True, help="directory of .emb files")
    s.add_argument(
        "--recordings", default=None, help="recordings CSV to check coverage against"
    )
    s.set_defaults(fn=cmd_export_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except PipelineError as exc:
        print(json.dumps(exc.record(), sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
