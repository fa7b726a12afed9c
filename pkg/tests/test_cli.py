"""Command-line workflows: config handling, artifacts, and exit codes."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from stylo.cli import RunConfig, CliError, load_config, main
from stylo.corpus import words
from stylo.synth import synthetic_works

from conftest import make_manifest


@pytest.fixture(scope="module")
def corpus(tmp_path_factory) -> Path:
    """Three authors, two works each, plus an unlabeled query."""
    base = tmp_path_factory.mktemp("corpus")
    work_rows = synthetic_works(
        ["ana", "eva", "ivo"], works_per_author=2, words_per_work=1300, seed=21
    )
    docs = [
        {"id": work_id, "author": author, "title": work_id, "text": text}
        for work_id, author, text in work_rows
    ]
    query = synthetic_works(["ana"], works_per_author=1, words_per_work=1300, seed=77)
    docs.append({"id": "anon", "title": "Anon", "text": query[0][2]})
    return make_manifest(base, docs, min_chunk_words=150)


def _fast_config(tmp_path: Path, corpus: Path, **overrides) -> str:
    cfg = {
        "manifest": str(corpus),
        "out_dir": str(tmp_path / "run"),
        "seed": 1,
        "analyses": ["delta"],
        "features": ["stopwords"],
        "classifiers": ["nearest_centroid"],
        "mfw": [50],
        "culling": [0.0],
        "delta_kinds": ["burrows", "cosine_delta"],
        "folds": 2,
        "pca_components": [2],
        "pca_mfw": [25],
        "unmasking": {"n": 60, "k": 3, "m": 4, "cv_folds": 2},
    }
    cfg.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return str(path)


class TestConfig:
    def test_unknown_key_rejected(self, tmp_path: Path) -> None:
        path = tmp_path / "c.json"
        path.write_text('{"workers": 4}', encoding="utf-8")
        with pytest.raises(CliError, match="unknown config keys"):
            load_config(str(path))

    def test_missing_file_rejected(self) -> None:
        with pytest.raises(CliError, match="not found"):
            load_config("/no/such/config.json")

    def test_invalid_json_rejected(self, tmp_path: Path) -> None:
        path = tmp_path / "c.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(CliError, match="not valid JSON"):
            load_config(str(path))

    def test_defaults(self) -> None:
        cfg = load_config(None)
        assert cfg.out_dir == "stylo_out"
        assert cfg.compressor == "bz2"
        assert cfg.analyses == ["delta", "ncd", "pca", "classify", "unmask"]

    def test_seed_precedence(self, monkeypatch) -> None:
        monkeypatch.delenv("STYLO_SEED", raising=False)
        assert RunConfig().resolved_seed() == 0
        monkeypatch.setenv("STYLO_SEED", "7")
        assert RunConfig().resolved_seed() == 7
        assert RunConfig(seed=3).resolved_seed() == 3
        monkeypatch.setenv("STYLO_SEED", "abc")
        with pytest.raises(CliError, match="STYLO_SEED"):
            RunConfig().resolved_seed()

    def test_flag_overrides_config(self, tmp_path: Path, corpus: Path) -> None:
        cfg_path = _fast_config(tmp_path, corpus, seed=1)
        out = tmp_path / "run"
        assert main(["ingest", "--config", cfg_path, "--seed", "5"]) == 0
        report = json.loads((out / "run_report.json").read_text())
        assert report["config"]["seed"] == 5

    def test_unknown_analysis_in_config(self, tmp_path: Path, corpus: Path) -> None:
        cfg_path = _fast_config(tmp_path, corpus, analyses=["delta", "magic"])
        assert main(["analyze", "--config", cfg_path]) == 1


class TestIngest:
    def test_artifacts(self, tmp_path: Path, corpus: Path) -> None:
        cfg_path = _fast_config(tmp_path, corpus)
        assert main(["ingest", "--config", cfg_path]) == 0
        out = tmp_path / "run"
        meta = json.loads((out / "ingest" / "corpus.json").read_text())
        assert len(meta["documents"]) == 7
        assert meta["min_chunk_words"] == 150
        chunk_rows = json.loads((out / "ingest" / "chunks.json").read_text())
        by_doc: dict[str, int] = {}
        for row in chunk_rows:
            by_doc[row["doc_id"]] = by_doc.get(row["doc_id"], 0) + row["word_count"]
        for doc in meta["documents"]:
            canon = (out / "ingest" / "canonical" / f"{doc['id']}.txt").read_text()
            assert len(words(canon)) == doc["words"] == by_doc[doc["id"]]
        assert (out / "run_report.json").exists()

    def test_requires_manifest(self, tmp_path: Path) -> None:
        assert main(["ingest", "--out", str(tmp_path / "r")]) == 1

    def test_overwrite_needs_force(self, tmp_path: Path, corpus: Path) -> None:
        cfg_path = _fast_config(tmp_path, corpus)
        assert main(["ingest", "--config", cfg_path]) == 0
        assert main(["ingest", "--config", cfg_path]) == 1
        assert main(["ingest", "--config", cfg_path, "--force"]) == 0


class TestAnalyze:
    def test_delta_stage(self, tmp_path: Path, corpus: Path) -> None:
        cfg_path = _fast_config(tmp_path, corpus)
        assert main(["ingest", "--config", cfg_path]) == 0
        assert main(["analyze", "--config", cfg_path, "--force"]) == 0
        out = tmp_path / "run"
        grid = (out / "delta" / "delta_grid.csv").read_text().strip().splitlines()
        # 1 mfw x 1 culling x 2 kinds plus header
        assert len(grid) == 3
        assert (out / "delta" / "dendrogram.dot").exists()
        report = json.loads((out / "run_report.json").read_text())
        stages = {s["name"]: s["status"] for s in report["stages"]}
        assert stages["delta"] == "ok"

    def test_partial_failure_exits_two(self, tmp_path: Path, corpus: Path) -> None:
        # unmasking config valid in itself but impossible for this corpus
        # size, so that stage errors while delta succeeds
        cfg_path = _fast_config(
            tmp_path, corpus,
            analyses=["delta", "unmask"],
            unmasking={"n": 250, "k": 6, "m": 8, "cv_folds": 10},
        )
        assert main(["ingest", "--config", cfg_path]) == 0
        assert main(["analyze", "--config", cfg_path, "--force"]) == 2
        report = json.loads((tmp_path / "run" / "run_report.json").read_text())
        stages = {s["name"]: s["status"] for s in report["stages"]}
        assert stages["delta"] == "ok"
        assert stages["unmask"] == "error"

    def test_analysis_flag_and_stage_order(self, tmp_path: Path, corpus: Path) -> None:
        cfg_path = _fast_config(tmp_path, corpus, analyses=["ncd", "delta"])
        assert main(["ingest", "--config", cfg_path]) == 0
        assert main(
            ["analyze", "--config", cfg_path, "--force", "--analysis", "all"]
        ) == 0
        report = json.loads((tmp_path / "run" / "run_report.json").read_text())
        # 'all' expands to the canonical order, overriding the config list
        assert [s["name"] for s in report["stages"]] == [
            "delta", "ncd", "pca", "classify", "unmask",
        ]
        assert report["config"]["analyses"] == [
            "delta", "ncd", "pca", "classify", "unmask",
        ]

    def test_analyze_without_ingest_fails(self, tmp_path: Path, corpus: Path) -> None:
        cfg_path = _fast_config(tmp_path, corpus)
        assert main(["analyze", "--config", cfg_path]) == 1


class TestReportCommand:
    def test_summary_written(self, tmp_path: Path, corpus: Path) -> None:
        cfg_path = _fast_config(tmp_path, corpus, analyses=["delta", "ncd"])
        assert main(["ingest", "--config", cfg_path]) == 0
        assert main(["analyze", "--config", cfg_path, "--force"]) == 0
        assert main(["report", "--config", cfg_path, "--force"]) == 0
        out = tmp_path / "run"
        summary = json.loads((out / "summary.json").read_text())
        assert summary["delta_best"]["kind"] in {
            "burrows", "cosine_delta",
        }
        assert "anon" in summary["ncd_neighbors"]
        text = (out / "summary.txt").read_text()
        assert "delta" in text.lower()

    def test_report_without_run_fails(self, tmp_path: Path) -> None:
        assert main(["report", "--out", str(tmp_path / "empty")]) == 1


class TestCompressors:
    def test_list(self, capsys) -> None:
        assert main(["compressors", "list"]) == 0
        out = capsys.readouterr().out
        assert "bz2" in out and "zlib" in out


class TestUnmaskStage:
    def test_verdicts_written(self, tmp_path: Path, corpus: Path) -> None:
        cfg_path = _fast_config(tmp_path, corpus, analyses=["unmask"])
        assert main(["ingest", "--config", cfg_path]) == 0
        assert main(["analyze", "--config", cfg_path, "--force"]) == 0
        out = tmp_path / "run"
        curves = json.loads((out / "unmask" / "curves.json").read_text())
        assert curves, "no curves produced"
        for row in curves:
            assert len(row["accuracies"]) == 4 + 1
        verdicts = json.loads((out / "unmask" / "verdicts.json").read_text())
        assert "anon" in verdicts
