"""Delta distances, clustering, separation scoring, and the grid search."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pytest

from stylo.distance import (
    DELTA_KINDS,
    Dendrogram,
    DistanceError,
    DistanceMatrix,
    cluster,
    delta,
    delta_grid,
    dendrogram_dot,
    dendrogram_json,
    load_distance_csv,
    pairwise,
    save_distance_csv,
    separation,
)
from stylo.features import FeatureMatrix, FeatureSpec, build_vocabulary, extract, tokenize, zscore


def _fm(rows, names=None, scaling="raw_relative"):
    rows = np.array(rows, dtype=np.float64)
    names = names or [f"f{i}" for i in range(rows.shape[1])]
    return FeatureMatrix(
        sample_ids=[f"s{i}" for i in range(rows.shape[0])],
        feature_names=list(names),
        values=rows,
        spec=FeatureSpec(kind="bow", mfw=rows.shape[1]),
        scaling=scaling,
    )


class TestDeltaScalar:
    def test_identity_for_every_kind(self) -> None:
        a = np.array([0.3, 1.2, -0.7, 0.0])
        for kind in DELTA_KINDS:
            v = a + 1.0 if kind == "eder_simple" else a
            assert delta(v, v, kind) == pytest.approx(0.0, abs=1e-12), kind

    def test_burrows_hand_case(self) -> None:
        assert delta(np.array([1.0, -1.0]), np.array([0.0, 0.0]), "burrows") == 1.0

    def test_eder_hand_case(self) -> None:
        # weights (2-1+1)/2=1 and (2-2+1)/2=0.5 on |dz|=1 each, averaged
        got = delta(np.array([1.0, -1.0]), np.array([0.0, 0.0]), "eder")
        assert got == pytest.approx(0.75)

    def test_eder_simple_hand_case(self) -> None:
        a, b = np.array([0.25, 0.0]), np.array([0.0, 1.0])
        assert delta(a, b, "eder_simple") == pytest.approx(1.5)

    def test_cosine_delta_hand_case(self) -> None:
        a, b = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        assert delta(a, b, "cosine_delta") == pytest.approx(1.0)
        assert delta(a, -a, "cosine_delta") == pytest.approx(2.0)

    def test_euclidean_manhattan_canberra(self) -> None:
        a, b = np.array([3.0, 0.0]), np.array([0.0, 4.0])
        assert delta(a, b, "euclidean") == pytest.approx(5.0)
        assert delta(a, b, "manhattan") == pytest.approx(7.0)
        assert delta(a, b, "canberra") == pytest.approx(2.0)

    def test_canberra_zero_over_zero_is_zero(self) -> None:
        a, b = np.array([0.0, 1.0]), np.array([0.0, 3.0])
        assert delta(a, b, "canberra") == pytest.approx(0.5)

    def test_cosine_zero_vector_rejected(self) -> None:
        with pytest.raises(DistanceError):
            delta(np.zeros(3), np.ones(3), "cosine_delta")

    def test_dimension_mismatch_rejected(self) -> None:
        with pytest.raises(DistanceError):
            delta(np.ones(3), np.ones(4), "burrows")

    def test_axioms_on_random_pairs(self, rng) -> None:
        for _ in range(200):
            d = int(rng.integers(1, 30))
            a = rng.normal(size=d)
            b = rng.normal(size=d)
            for kind in DELTA_KINDS:
                if kind == "eder_simple":
                    va, vb = np.abs(a), np.abs(b)
                elif kind == "cosine_delta" and (
                    not np.linalg.norm(a) or not np.linalg.norm(b)
                ):
                    continue
                else:
                    va, vb = a, b
                dv = delta(va, vb, kind)
                assert dv >= 0.0, kind
                assert math.isfinite(dv), kind
                assert dv == pytest.approx(delta(vb, va, kind), abs=1e-12), kind
                assert delta(va, va, kind) == pytest.approx(0.0, abs=1e-12), kind


class TestPairwise:
    def _streams(self, texts):
        return [tokenize(t, f"s{i}") for i, t in enumerate(texts)]

    def test_identical_rows_zero_off_diagonal(self) -> None:
        fm = _fm([[0.5, 0.5], [0.5, 0.5], [0.2, 0.8]])
        dist = pairwise(fm, "manhattan")
        assert dist.values[0, 1] == pytest.approx(0.0, abs=1e-12)
        assert dist.values[0, 2] > 0

    def test_shape_and_symmetry(self) -> None:
        fm = _fm([[0.6, 0.4], [0.1, 0.9], [0.3, 0.7]])
        dist = pairwise(fm, "burrows")
        assert dist.values.shape == (3, 3)
        assert np.array_equal(dist.values, dist.values.T)
        assert np.diagonal(dist.values).tolist() == [0.0, 0.0, 0.0]
        offdiag = {dist.values[i, j] for i in range(3) for j in range(i + 1, 3)}
        assert len(offdiag) == 3

    def test_matches_scalar_oracle(self, rng) -> None:
        raw = rng.random((5, 8)) + 0.05
        raw /= raw.sum(axis=1, keepdims=True)
        fm = _fm(raw)
        z = zscore(fm)
        for kind in DELTA_KINDS:
            dist = pairwise(fm, kind)
            base = np.sqrt(raw) if kind == "eder_simple" else z.values
            for i in range(5):
                for j in range(5):
                    if i == j:
                        continue
                    if kind == "eder_simple":
                        want = float(np.abs(base[i] - base[j]).sum())
                    else:
                        want = delta(base[i], base[j], kind)
                    assert dist.values[i, j] == pytest.approx(want, abs=1e-9), kind

    def test_zscored_input_not_rescaled(self, rng) -> None:
        raw = rng.random((4, 6))
        fm = zscore(_fm(raw))
        dist = pairwise(fm, "burrows")
        want = delta(fm.values[0], fm.values[1], "burrows")
        assert dist.values[0, 1] == pytest.approx(want, abs=1e-12)

    def test_eder_simple_rejects_zscored_input(self, rng) -> None:
        fm = zscore(_fm(rng.random((3, 4))))
        with pytest.raises(DistanceError):
            pairwise(fm, "eder_simple")

    def test_scaling_invariance(self, rng) -> None:
        raw = rng.random((6, 10)) + 0.01
        scales = rng.uniform(0.5, 20.0, size=10)
        for kind in ("burrows", "eder", "cosine_delta"):
            a = pairwise(_fm(raw), kind)
            b = pairwise(_fm(raw * scales), kind)
            assert np.abs(a.values - b.values).max() < 1e-9, kind

    def test_single_sample_rejected(self) -> None:
        with pytest.raises(DistanceError):
            pairwise(_fm([[1.0, 2.0]]), "burrows")


class TestDistanceMatrixType:
    def test_asymmetric_rejected(self) -> None:
        bad = np.array([[0.0, 1.0], [2.0, 0.0]])
        with pytest.raises(DistanceError):
            DistanceMatrix(ids=["a", "b"], values=bad, kind="burrows")

    def test_nonzero_diagonal_rejected(self) -> None:
        bad = np.array([[0.5, 1.0], [1.0, 0.0]])
        with pytest.raises(DistanceError):
            DistanceMatrix(ids=["a", "b"], values=bad, kind="burrows")

    def test_negative_rejected(self) -> None:
        bad = np.array([[0.0, -1.0], [-1.0, 0.0]])
        with pytest.raises(DistanceError):
            DistanceMatrix(ids=["a", "b"], values=bad, kind="burrows")

    def test_nonfinite_rejected(self) -> None:
        bad = np.array([[0.0, np.inf], [np.inf, 0.0]])
        with pytest.raises(DistanceError):
            DistanceMatrix(ids=["a", "b"], values=bad, kind="burrows")


def _dist(ids, matrix):
    return DistanceMatrix(ids=list(ids), values=np.array(matrix, dtype=float),
                          kind="manhattan")


class TestCluster:
    def test_two_leaves(self) -> None:
        dend = cluster(_dist("AB", [[0, 3], [3, 0]]))
        assert len(dend.merges) == 1
        left, right, height, node = dend.merges[0]
        assert {left, right} == {0, 1}
        assert height == pytest.approx(3.0)
        assert node == 2

    def test_hand_traced_three_points(self) -> None:
        dend = cluster(_dist("ABC", [[0, 1, 10], [1, 0, 10], [10, 10, 0]]))
        first = dend.merges[0]
        assert {first[0], first[1]} == {0, 1}
        assert first[2] == pytest.approx(1.0)
        second = dend.merges[1]
        assert second[2] == pytest.approx(10.0)  # (10+10)/2 average linkage

    def test_complete_and_single_linkage(self) -> None:
        d = _dist("ABC", [[0, 1, 4], [1, 0, 6], [4, 6, 0]])
        comp = cluster(d, linkage="complete")
        assert comp.merges[1][2] == pytest.approx(6.0)
        sing = cluster(d, linkage="single")
        assert sing.merges[1][2] == pytest.approx(4.0)

    def test_merge_count_and_monotone_heights(self, rng) -> None:
        n = 9
        pts = rng.random((n, 3))
        vals = np.abs(pts[:, None, :] - pts[None, :, :]).sum(axis=2)
        np.fill_diagonal(vals, 0.0)
        vals = (vals + vals.T) / 2
        d = DistanceMatrix(ids=[f"s{i}" for i in range(n)], values=vals, kind="manhattan")
        for linkage in ("average", "complete"):
            dend = cluster(d, linkage=linkage)
            assert len(dend.merges) == n - 1
            heights = [m[2] for m in dend.merges]
            assert all(h2 >= h1 - 1e-12 for h1, h2 in zip(heights, heights[1:]))

    def test_deterministic_tie_break(self) -> None:
        # all distances equal: merges must pick smallest (i, j) first
        vals = np.ones((4, 4)) - np.eye(4)
        d = DistanceMatrix(ids=list("ABCD"), values=vals, kind="manhattan")
        dend = cluster(d)
        assert (dend.merges[0][0], dend.merges[0][1]) == (0, 1)

    def test_single_leaf_rejected(self) -> None:
        with pytest.raises(DistanceError):
            cluster(_dist("A", [[0]]))


class TestSeparation:
    def test_directionality(self) -> None:
        vals = np.array([
            [0, 0, 1, 1],
            [0, 0, 1, 1],
            [1, 1, 0, 0],
            [1, 1, 0, 0],
        ], dtype=float)
        d = DistanceMatrix(ids=list("abcd"), values=vals, kind="manhattan")
        score = separation(d, ["x", "x", "y", "y"])
        assert score.ingroup_mean == pytest.approx(0.0)
        assert score.outgroup_mean == pytest.approx(1.0)
        assert score.raw_difference == pytest.approx(1.0)
        assert score.standardized_difference > 10

    def test_equal_distributions_zero_difference(self) -> None:
        vals = np.ones((4, 4)) - np.eye(4)
        d = DistanceMatrix(ids=list("abcd"), values=vals, kind="manhattan")
        score = separation(d, ["x", "x", "y", "y"])
        assert score.raw_difference == pytest.approx(0.0)

    def test_raw_difference_identity(self, rng) -> None:
        n = 6
        vals = rng.random((n, n))
        vals = np.triu(vals, 1)
        vals = vals + vals.T
        d = DistanceMatrix(ids=[f"s{i}" for i in range(n)], values=vals, kind="manhattan")
        score = separation(d, ["a", "a", "a", "b", "b", "b"])
        assert score.raw_difference == pytest.approx(
            score.outgroup_mean - score.ingroup_mean, abs=1e-15,
        )

    def test_no_ingroup_rejected(self) -> None:
        vals = np.ones((2, 2)) - np.eye(2)
        d = DistanceMatrix(ids=list("ab"), values=vals, kind="manhattan")
        with pytest.raises(DistanceError):
            separation(d, ["x", "y"])

    def test_single_author_rejected(self) -> None:
        vals = np.ones((3, 3)) - np.eye(3)
        d = DistanceMatrix(ids=list("abc"), values=vals, kind="manhattan")
        with pytest.raises(DistanceError):
            separation(d, ["x", "x", "x"])


class TestDeltaGrid:
    def _corpus(self):
        # every author uses the shared function words, at different rates,
        # so culling at any level keeps discriminative columns
        shared = "de la que en se no por con "
        texts = {
            "a": shared * 3 + "casa luz viento sombra camino cielo ",
            "b": shared * 2 + "mar ola barco puerto sal arena de la ",
            "c": shared * 1 + "monte piedra nieve valle rio bosque en que se no ",
        }
        streams, labels = [], []
        for author, base in texts.items():
            for i in range(3):
                text = base * 30 + f"firma{'x' * (i + 1)} " * (2 + i)
                streams.append(tokenize(text, f"{author}{i}"))
                labels.append(author)
        return streams, labels

    def test_single_cell(self) -> None:
        streams, labels = self._corpus()
        rows = delta_grid(streams, labels, [50], [0.0], ["burrows"])
        assert len(rows) == 1
        assert rows[0].mfw == 50 and rows[0].kind == "burrows"

    def test_cartesian_size(self) -> None:
        streams, labels = self._corpus()
        rows = delta_grid(streams, labels, [100, 500], [0.0, 50.0], ["burrows"])
        assert len(rows) == 4

    def test_full_grid_count_exact(self) -> None:
        streams, labels = self._corpus()
        rows = delta_grid(streams, labels, [20, 50], [0.0, 30.0], list(DELTA_KINDS))
        assert len(rows) == 2 * 2 * len(DELTA_KINDS)

    def test_top_row_positive_and_sorted(self) -> None:
        streams, labels = self._corpus()
        rows = delta_grid(streams, labels, [20, 50], [0.0], ["burrows", "cosine_delta"])
        scores = [r.score.standardized_difference for r in rows]
        assert scores[0] > 0
        assert scores == sorted(scores, reverse=True)


class TestSerialization:
    def test_distance_csv_roundtrip(self, tmp_path: Path) -> None:
        vals = np.array([[0.0, 1.5], [1.5, 0.0]])
        d = DistanceMatrix(ids=["x", "y"], values=vals, kind="burrows")
        path = tmp_path / "d.csv"
        save_distance_csv(d, str(path))
        back = load_distance_csv(str(path), kind="burrows")
        assert back.ids == ["x", "y"]
        assert back.values == pytest.approx(vals, abs=0)

    def test_dendrogram_dot_shape(self) -> None:
        dend = cluster(_dist("ABC", [[0, 1, 10], [1, 0, 10], [10, 10, 0]]))
        dot = dendrogram_dot(dend)
        assert dot.startswith("digraph")
        assert '"A"' in dot and '"B"' in dot and '"C"' in dot
        unrooted = dendrogram_dot(dend, unrooted=True)
        assert unrooted.startswith("graph")
        assert "neato" in unrooted

    def test_dendrogram_json_merges(self) -> None:
        dend = cluster(_dist("AB", [[0, 2], [2, 0]]))
        payload = json.loads(dendrogram_json(dend))
        assert payload["leaves"] == ["A", "B"]
        assert len(payload["merges"]) == 1
