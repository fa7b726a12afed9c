"""Degradation curves, their meta-features, and verification verdicts."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np
import pytest

from stylo.corpus import Chunk
from stylo.learn import predict
from stylo.unmasking import (
    DIFFERENT_AUTHOR,
    SAME_AUTHOR,
    CurveSet,
    DegradationCurve,
    UnmaskingConfig,
    UnmaskingError,
    Verdict,
    build_curve_dataset,
    curve_features,
    pair_features,
    save_curves_csv,
    save_curves_json,
    train_meta,
    unmask_pair,
    verify,
)

CFG = UnmaskingConfig(n=60, k=3, m=4, cv_folds=3, seed=0)


def _style_chunks(
    doc_id: str, style: int, seed: int, n_chunks: int = 4, words: int = 220
) -> list[Chunk]:
    """Chunks over a shared vocabulary with a style-specific tilt."""
    rng = np.random.default_rng(seed)
    vocab = [f"w{i:02d}" for i in range(80)]
    weights = 1.0 / (np.arange(80) + 2.0)
    tilt = np.ones(80)
    tilt[style * 12 : style * 12 + 12] = 3.0
    probs = weights * tilt
    probs /= probs.sum()
    chunks = []
    for i in range(n_chunks):
        toks = [vocab[j] for j in rng.choice(80, size=words, p=probs)]
        chunks.append(
            Chunk(
                doc_id=doc_id,
                index=i,
                tokens=toks,
                word_count=words,
                text=" ".join(toks),
            )
        )
    return chunks


class TestConfig:
    def test_defaults(self) -> None:
        cfg = UnmaskingConfig()
        assert (cfg.n, cfg.k, cfg.m, cfg.cv_folds) == (250, 6, 8, 10)
        assert cfg.curve_length == 9

    def test_vocabulary_must_survive_schedule(self) -> None:
        with pytest.raises(UnmaskingError, match="must exceed"):
            UnmaskingConfig(n=96, k=6, m=8)
        UnmaskingConfig(n=97, k=6, m=8)

    def test_positive_values_required(self) -> None:
        with pytest.raises(UnmaskingError):
            UnmaskingConfig(n=250, k=0)


class TestPairFeatures:
    def test_vocabulary_ranked_by_average_relative_frequency(self) -> None:
        # the probe word sits at 0.02 in the work and 0.01 in the
        # candidate: its rank key is the hand average 0.015
        def side(doc: str, x: int, y: int, z: int) -> list[Chunk]:
            toks = ["x"] * x + ["y"] * y + ["z"] * z
            toks += ["q"] * (1000 - len(toks))
            return [
                Chunk(doc_id=doc, index=0, tokens=toks, word_count=1000, text="")
            ]

        cfg = UnmaskingConfig(n=4, k=1, m=1, cv_folds=1)
        fm, labels = pair_features(
            side("w", x=20, y=20, z=20), side("c", x=10, y=12, z=8), cfg
        )
        assert fm.feature_names == ["q", "y", "x", "z"]
        assert labels == ["work", "candidate"]
        col = fm.feature_names.index("x")
        assert fm.values[0, col] == pytest.approx(0.02, abs=1e-12)
        assert fm.values[1, col] == pytest.approx(0.01, abs=1e-12)

    def test_rank_ties_break_lexicographically(self) -> None:
        toks = ["b"] * 5 + ["a"] * 5 + ["c"] * 2

        def mk(doc: str) -> list[Chunk]:
            return [Chunk(doc_id=doc, index=0, tokens=toks, word_count=12, text="")]

        fm, _ = pair_features(mk("w"), mk("c"), UnmaskingConfig(n=3, k=1, m=1, cv_folds=1))
        assert fm.feature_names == ["a", "b", "c"]

    def test_rows_are_relative_frequencies(self) -> None:
        a = _style_chunks("a", style=0, seed=1)
        b = _style_chunks("b", style=1, seed=2)
        fm, _ = pair_features(a, b, CFG)
        # every token is in-vocabulary here, so rows sum to 1
        assert fm.values.shape == (8, 60)
        assert np.allclose(fm.values.sum(axis=1), 1.0, atol=1e-9) or np.all(
            fm.values.sum(axis=1) <= 1.0 + 1e-9
        )

    def test_side_size_guard(self) -> None:
        a = _style_chunks("a", style=0, seed=1, n_chunks=2)
        b = _style_chunks("b", style=1, seed=2)
        with pytest.raises(UnmaskingError, match="cv_folds"):
            pair_features(a, b, CFG)
        with pytest.raises(UnmaskingError, match="cv_folds"):
            pair_features(b, a, CFG)


class TestUnmaskPair:
    def test_curve_shape_and_live_counts(self) -> None:
        a = _style_chunks("a", style=0, seed=1)
        b = _style_chunks("b", style=1, seed=2)
        curve = unmask_pair(a, b, CFG, pair=("a", "b"))
        assert len(curve.accuracies) == CFG.m + 1
        assert curve.live_counts == tuple(
            60 - 2 * CFG.k * t for t in range(CFG.m + 1)
        )
        assert all(0.0 <= acc <= 1.0 for acc in curve.accuracies)

    def test_distinct_styles_start_separable(self) -> None:
        a = _style_chunks("a", style=0, seed=3, n_chunks=6)
        b = _style_chunks("b", style=1, seed=4, n_chunks=6)
        curve = unmask_pair(a, b, CFG, pair=("a", "b"))
        assert curve.accuracies[0] >= 0.8

    def test_deterministic(self) -> None:
        a = _style_chunks("a", style=0, seed=1)
        b = _style_chunks("b", style=1, seed=2)
        c1 = unmask_pair(a, b, CFG)
        c2 = unmask_pair(a, b, CFG)
        assert c1.accuracies == c2.accuracies

    def test_removing_strongest_degrades_faster_than_removing_weakest(self) -> None:
        a = _style_chunks("a", style=0, seed=5, n_chunks=6)
        b = _style_chunks("b", style=0, seed=6, n_chunks=6)
        strongest = unmask_pair(a, b, CFG, pair=("a", "b"))
        weakest = unmask_pair(a, b, CFG, pair=("a", "b"), remove_least=True)
        assert strongest.total_drop >= weakest.total_drop

    def test_accuracy_bounds_validated(self) -> None:
        with pytest.raises(UnmaskingError):
            DegradationCurve(pair=("a", "b"), accuracies=[0.5, 1.5])
        with pytest.raises(UnmaskingError):
            DegradationCurve(pair=("a", "b"), accuracies=[0.5])
        with pytest.raises(UnmaskingError):
            DegradationCurve(
                pair=("a", "b"), accuracies=[0.5, 0.4], live_counts=(60,)
            )


class TestCurveFeatures:
    def test_dimension_and_layout(self) -> None:
        curve = DegradationCurve(pair=("a", "b"), accuracies=[0.9, 0.8, 0.4])
        vec = curve_features(curve)
        assert vec.shape == (2 * 2 + 2,)
        assert vec[:3] == pytest.approx([0.9, 0.8, 0.4])
        assert vec[3:5] == pytest.approx([-0.1, -0.4], abs=1e-12)
        assert vec[5] == pytest.approx(0.4, abs=1e-12)

    def test_total_drop(self) -> None:
        curve = DegradationCurve(pair=("a", "b"), accuracies=[0.9, 0.2])
        assert curve.total_drop == pytest.approx(0.7, abs=1e-12)


def _six_work_corpus() -> list[tuple[str, str, list[Chunk]]]:
    works = []
    seed = 10
    for author, style in (("ana", 0), ("eva", 1), ("ivo", 2)):
        for w in (1, 2):
            seed += 1
            works.append(
                (f"{author}_w{w}", author, _style_chunks(f"{author}_w{w}", style, seed))
            )
    return works


class TestCurveDataset:
    def test_three_authors_two_works_yield_eighteen_curves(self) -> None:
        ds = build_curve_dataset(_six_work_corpus(), CFG)
        assert len(ds.curves) == 18
        assert ds.class_counts == {SAME_AUTHOR: 6, DIFFERENT_AUTHOR: 12}
        assert ds.values.shape == (18, 2 * CFG.m + 2)
        assert ds.skipped == []

    def test_same_author_side_excludes_the_work_itself(self) -> None:
        ds = build_curve_dataset(_six_work_corpus(), CFG)
        same = [c for c in ds.curves if c.label == SAME_AUTHOR]
        assert {c.pair for c in same} == {
            (f"{a}_w{w}", a) for a in ("ana", "eva", "ivo") for w in (1, 2)
        }

    def test_undersized_sides_recorded_as_skipped(self) -> None:
        works = _six_work_corpus()
        tiny = _style_chunks("ana_w3", style=0, seed=99, n_chunks=2)
        works.append(("ana_w3", "ana", tiny))
        ds = build_curve_dataset(works, CFG)
        skipped_works = {w for w, _ in ds.skipped}
        assert skipped_works == {"ana_w3"}
        assert len(ds.skipped) == 3

    def test_duplicate_work_ids_rejected(self) -> None:
        works = _six_work_corpus()
        works.append(works[0])
        with pytest.raises(UnmaskingError, match="duplicate"):
            build_curve_dataset(works, CFG)

    def test_needs_one_author_with_two_works(self) -> None:
        works = [
            ("a_w1", "a", _style_chunks("a_w1", 0, 1)),
            ("b_w1", "b", _style_chunks("b_w1", 1, 2)),
        ]
        with pytest.raises(UnmaskingError, match="two works"):
            build_curve_dataset(works, CFG)


@pytest.fixture(scope="module")
def meta():
    ds = build_curve_dataset(_six_work_corpus(), CFG)
    return train_meta(ds, CFG), ds


class TestMetaAndVerify:
    def test_meta_separates_training_curves(self, meta) -> None:
        model, ds = meta
        preds = predict(model, ds.values)
        acc = sum(p == t for p, t in zip(preds, ds.labels)) / len(ds.labels)
        assert acc >= 0.8

    def test_single_class_dataset_rejected(self) -> None:
        curve = DegradationCurve(
            pair=("a", "b"), accuracies=[0.9, 0.8], label=SAME_AUTHOR
        )
        ds = CurveSet(
            curves=[curve, curve],
            values=np.vstack([curve_features(curve)] * 2),
            labels=[SAME_AUTHOR, SAME_AUTHOR],
            class_counts={SAME_AUTHOR: 2},
        )
        with pytest.raises(UnmaskingError, match="single class"):
            train_meta(ds, CFG)

    def test_verify_finds_the_matching_candidate(self, meta) -> None:
        model, _ = meta
        query = _style_chunks("query", style=0, seed=77, n_chunks=5)
        candidates = {
            "ana": _style_chunks("ana_all", style=0, seed=11, n_chunks=8),
            "eva": _style_chunks("eva_all", style=1, seed=12, n_chunks=8),
        }
        verdict = verify(query, candidates, model, CFG)
        assert set(verdict.per_candidate) == {"ana", "eva"}
        assert "ana" in verdict.matched
        for author, (label, score) in verdict.per_candidate.items():
            assert label in (SAME_AUTHOR, DIFFERENT_AUTHOR)
            assert isinstance(score, float)

    def test_verdict_outcome_none_iff_unmatched(self) -> None:
        hit = Verdict(per_candidate={"a": (SAME_AUTHOR, 1.0)}, matched=["a"])
        miss = Verdict(per_candidate={"a": (DIFFERENT_AUTHOR, -1.0)}, matched=[])
        assert hit.outcome == "a"
        assert miss.outcome is None
        assert miss.to_dict()["outcome"] is None

    def test_verify_requires_candidates(self, meta) -> None:
        model, _ = meta
        with pytest.raises(UnmaskingError):
            verify(_style_chunks("q", 0, 1), {}, model, CFG)


class TestSerialization:
    def test_csv_layout(self, tmp_path: Path) -> None:
        curves = [
            DegradationCurve(
                pair=("w1", "ana"), accuracies=[1.0, 0.5], label=SAME_AUTHOR
            )
        ]
        path = tmp_path / "curves.csv"
        save_curves_csv(curves, str(path))
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["work", "candidate", "label", "step", "accuracy"]
        assert rows[1] == ["w1", "ana", SAME_AUTHOR, "0", "1.0"]
        assert rows[2] == ["w1", "ana", SAME_AUTHOR, "1", "0.5"]

    def test_json_payload(self, tmp_path: Path) -> None:
        curves = [
            DegradationCurve(
                pair=("w1", "eva"), accuracies=[0.9, 0.3], label=DIFFERENT_AUTHOR
            )
        ]
        path = tmp_path / "curves.json"
        save_curves_json(curves, str(path))
        payload = json.loads(path.read_text())
        assert payload == [
            {
                "work": "w1",
                "candidate": "eva",
                "label": DIFFERENT_AUTHOR,
                "accuracies": [0.9, 0.3],
            }
        ]
