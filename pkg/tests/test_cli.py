"""CLI wiring: exit codes, stderr error records, flag overrides."""

import json

import numpy as np
import pytest

from speechscreen.cli import main
from speechscreen.embeddings import EmbeddingFile, EmbeddingMode, write_embedding_file

from conftest import SMALL_OVERRIDES


def read_digest(run_dir):
    text = (run_dir / "extract.ok").read_text(encoding="utf-8")
    return text.splitlines()[0].split("=", 1)[1]


def shrink_config(corpus):
    path = corpus / "config.json"
    raw = json.loads(path.read_text(encoding="utf-8"))
    raw.update(SMALL_OVERRIDES)
    path.write_text(json.dumps(raw, indent=2) + "\n", encoding="utf-8")
    return path


def test_synth_writes_corpus(tmp_path, capsys):
    out = tmp_path / "corpus"
    code = main(
        ["synth", "--out", str(out), "--seed", "3", "--subjects-per-class", "2"]
    )
    assert code == 0
    assert (out / "subjects.csv").is_file()
    assert (out / "recordings.csv").is_file()
    assert (out / "config.json").is_file()
    assert len(list((out / "audio").glob("*.wav"))) == 18
    assert "6 subjects" in capsys.readouterr().out


def test_stage_chain(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    assert main(["synth", "--out", str(corpus), "--subjects-per-class", "2"]) == 0
    config = shrink_config(corpus)
    run = tmp_path / "run"
    common = ["--config", str(config), "--run-dir", str(run)]

    assert main(["extract", *common]) == 0
    assert (run / "extract.ok").is_file()

    assert main(["train-eval", *common]) == 0
    assert (run / "candidates_classify.csv").is_file()
    assert (run / "candidates_regress.csv").is_file()

    assert main(["ensemble", *common]) == 0
    assert (run / "ensemble_classify.json").is_file()
    assert (run / "ensemble_regress.json").is_file()

    assert main(["predict", *common]) == 0
    table = (run / "predictions.csv").read_text(encoding="utf-8")
    assert "# unpredicted" not in table

    assert main(["report", *common]) == 0
    assert (run / "report" / "summary.txt").is_file()
    assert (run / "report" / "results.json").is_file()
    capsys.readouterr()

    # drop one subject's recordings: its feature files still exist but no
    # member can vote for it, so predict degrades to exit 1 with a record
    rec_path = corpus / "recordings.csv"
    lines = rec_path.read_text(encoding="utf-8").splitlines()
    kept = [lines[0]] + [l for l in lines[1:] if not l.startswith("hc01,")]
    assert len(kept) < len(lines)
    rec_path.write_text("\n".join(kept) + "\n", encoding="utf-8")

    assert main(["predict", *common]) == 1
    err = capsys.readouterr().err
    record = json.loads(err.strip().splitlines()[-1])
    assert record["error"] == "UnpredictedSubjects"
    assert any("hc01" in row for row in record["subjects"])
    assert "# unpredicted" in (run / "predictions.csv").read_text(encoding="utf-8")


def test_train_eval_single_mode(tmp_path):
    corpus = tmp_path / "corpus"
    assert main(["synth", "--out", str(corpus), "--subjects-per-class", "2"]) == 0
    config = shrink_config(corpus)
    run = tmp_path / "run"
    common = ["--config", str(config), "--run-dir", str(run)]
    assert main(["extract", *common]) == 0
    assert main(["train-eval", *common, "--mode", "classify"]) == 0
    assert (run / "candidates_classify.csv").is_file()
    assert not (run / "candidates_regress.csv").exists()


def test_unknown_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["transmogrify"])
    assert exc.value.code == 2


def test_missing_required_flag_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["extract", "--config", "x.json"])  # --run-dir absent
    assert exc.value.code == 2


def test_missing_config_reports_json_record(tmp_path, capsys):
    code = main(
        [
            "extract",
            "--config",
            str(tmp_path / "absent.json"),
            "--run-dir",
            str(tmp_path / "run"),
        ]
    )
    assert code == 1
    record = json.loads(capsys.readouterr().err.strip())
    assert set(record) >= {"error", "detail"}


def test_domain_error_maps_to_exit_1(tmp_path, capsys):
    # valid config but stage ordering violated
    corpus = tmp_path / "corpus"
    assert main(["synth", "--out", str(corpus), "--subjects-per-class", "2"]) == 0
    code = main(
        [
            "train-eval",
            "--config",
            str(corpus / "config.json"),
            "--run-dir",
            str(tmp_path / "run"),
        ]
    )
    assert code == 1
    record = json.loads(capsys.readouterr().err.strip())
    assert record["error"] == "MissingStageOutput"


def test_seed_override_changes_digest(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    assert main(["synth", "--out", str(corpus), "--subjects-per-class", "2"]) == 0
    config = str(corpus / "config.json")
    run_a, run_b, run_c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert main(["extract", "--config", config, "--run-dir", str(run_a)]) == 0
    assert main(
        ["extract", "--config", config, "--run-dir", str(run_b), "--seed", "99"]
    ) == 0
    assert main(
        ["extract", "--config", config, "--run-dir", str(run_c), "--seed", "99"]
    ) == 0
    capsys.readouterr()
    assert read_digest(run_a) != read_digest(run_b)
    assert read_digest(run_b) == read_digest(run_c)


def test_feature_sets_override(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    assert main(["synth", "--out", str(corpus), "--subjects-per-class", "2"]) == 0
    config = str(corpus / "config.json")
    run = tmp_path / "run"
    assert main(
        [
            "extract",
            "--config",
            config,
            "--run-dir",
            str(run),
            "--feature-sets",
            "pause16,fluency",
        ]
    ) == 0
    capsys.readouterr()
    produced = {p.name for p in (run / "features").iterdir()}
    assert produced == {"pause16", "fluency"}


class TestExportCheck:
    def write_valid(self, path, mode=EmbeddingMode.SEG30, rows=3, dim=4):
        emb = EmbeddingFile(
            mode=mode, values=np.ones((rows, dim), dtype=np.float32)
        )
        path.write_bytes(write_embedding_file(emb))

    def test_all_valid(self, tmp_path, capsys):
        self.write_valid(tmp_path / "a.seg30.emb")
        self.write_valid(tmp_path / "b.chunk16.emb", EmbeddingMode.CHUNK16, rows=16)
        assert main(["export-check", "--dir", str(tmp_path)]) == 0
        out = capsys.readouterr().out
        assert "a.seg30.emb mode=seg30 rows=3 dim=4 OK" in out

    def test_corrupted_file_fails(self, tmp_path, capsys):
        self.write_valid(tmp_path / "a.seg30.emb")
        good = (tmp_path / "a.seg30.emb").read_bytes()
        (tmp_path / "bad.seg30.emb").write_bytes(good[:-3])
        assert main(["export-check", "--dir", str(tmp_path)]) == 1
        captured = capsys.readouterr()
        assert "TruncatedPayload" in captured.out
        record = json.loads(captured.err.strip())
        assert record["error"] == "ExportCheckFailed"
        assert record["files"] == ["bad.seg30.emb"]

    def test_coverage_against_recordings(self, tmp_path, capsys):
        rec = tmp_path / "recordings.csv"
        rec.write_text(
            "subject_id,task,variant,audio_path\n"
            "s1,SFT,raw,audio/s1__SFT__raw.wav\n",
            encoding="utf-8",
        )
        emb_dir = tmp_path / "emb"
        emb_dir.mkdir()
        self.write_valid(emb_dir / "s1__SFT__raw.seg30.emb")
        code = main(
            ["export-check", "--dir", str(emb_dir), "--recordings", str(rec)]
        )
        assert code == 1
        captured = capsys.readouterr()
        assert "s1__SFT__raw.chunk16.emb FAIL missing" in captured.out

    def test_not_a_directory(self, tmp_path, capsys):
        assert main(["export-check", "--dir", str(tmp_path / "nope")]) == 1
        record = json.loads(capsys.readouterr().err.strip())
        assert "not a directory" in record["detail"]
