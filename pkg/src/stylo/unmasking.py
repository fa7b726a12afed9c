"""Open-set authorship verification through accuracy degradation.

For a (work, candidate author) pair, a linear SVM separates work chunks
from candidate chunks over the shared most-frequent-word vocabulary.
Removing the most discriminative features a few at a time and re-scoring
yields a degradation curve: same-author pairs collapse fast because only
a handful of superficial features keep the sides apart, different-author
pairs degrade slowly.  A meta-classifier over curve shapes then votes
same-author or different-author per candidate.
"""

from __future__ import annotations

import csv
import json
import zlib
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .corpus import Chunk
from .features import FeatureMatrix, FeatureSpec
from .learn import TrainedModel, cross_validate, decision_scores, predict, train

__all__ = [
    "UnmaskingError",
    "UnmaskingConfig",
    "DegradationCurve",
    "CurveSet",
    "Verdict",
    "SAME_AUTHOR",
    "DIFFERENT_AUTHOR",
    "pair_features",
    "unmask_pair",
    "curve_features",
    "build_curve_dataset",
    "train_meta",
    "verify",
    "save_curves_csv",
    "save_curves_json",
]

SAME_AUTHOR = "same_author"
DIFFERENT_AUTHOR = "different_author"


class UnmaskingError(Exception):
    """Invalid input to an unmasking computation."""


@dataclass(frozen=True)
class UnmaskingConfig:
    """Elimination schedule: vocabulary size n, features removed per end
    per step k, elimination steps m, CV folds, and the seed."""

    n: int = 250
    k: int = 6
    m: int = 8
    cv_folds: int = 10
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.n, self.k, self.m, self.cv_folds) < 1:
            raise UnmaskingError("all config values must be positive")
        if self.n <= 2 * self.k * self.m:
            raise UnmaskingError(
                f"n={self.n} must exceed 2*k*m={2 * self.k * self.m} "
                "so features survive every step"
            )

    @property
    def curve_length(self) -> int:
        return self.m + 1


@dataclass
class DegradationCurve:
    """Cross-validation accuracy at elimination steps 0..m for one pair."""

    pair: tuple[str, str]
    accuracies: list[float]
    label: str | None = None
    live_counts: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if len(self.accuracies) < 2:
            raise UnmaskingError("a curve needs at least two points")
        for a in self.accuracies:
            if not (0.0 <= a <= 1.0):
                raise UnmaskingError(f"accuracy {a} outside [0, 1]")
        if self.live_counts and len(self.live_counts) != len(self.accuracies):
            raise UnmaskingError("live_counts must align with accuracies")

    @property
    def total_drop(self) -> float:
        return self.accuracies[0] - self.accuracies[-1]


@dataclass
class CurveSet:
    """Labeled curve collection with its meta-feature matrix."""

    curves: list[DegradationCurve]
    values: np.ndarray
    labels: list[str]
    class_counts: dict[str, int]
    skipped: list[tuple[str, str]] = field(default_factory=list)


@dataclass
class Verdict:
    """Per-candidate same/different classification and the overall match."""

    per_candidate: dict[str, tuple[str, float]]
    matched: list[str]

    @property
    def outcome(self) -> str | None:
        return ", ".join(self.matched) if self.matched else None

    def to_dict(self) -> dict:
        return {
            "per_candidate": {
                c: {"label": lab, "score": score}
                for c, (lab, score) in self.per_candidate.items()
            },
            "matched": self.matched,
            "outcome": self.outcome,
        }


def _side_relative_freqs(chunks: Sequence[Chunk]) -> tuple[Counter, int]:
    counts: Counter[str] = Counter()
    total = 0
    for chunk in chunks:
        counts.update(chunk.tokens)
        total += len(chunk.tokens)
    return counts, total


def pair_features(
    work_chunks: Sequence[Chunk],
    candidate_chunks: Sequence[Chunk],
    cfg: UnmaskingConfig,
) -> tuple[FeatureMatrix, list[str]]:
    """Shared-vocabulary chunk vectors for one (work, candidate) pair.

    The vocabulary is the top-n words ranked by the average of the two
    sides' relative frequencies; each chunk becomes relative frequencies
    of those words over its own length.  Labels mark side membership.
    """
    if len(work_chunks) < cfg.cv_folds:
        raise UnmaskingError(
            f"work side has {len(work_chunks)} chunks, "
            f"needs at least cv_folds={cfg.cv_folds}"
        )
    if len(candidate_chunks) < cfg.cv_folds:
        raise UnmaskingError(
            f"candidate side has {len(candidate_chunks)} chunks, "
            f"needs at least cv_folds={cfg.cv_folds}"
        )
    w_counts, w_total = _side_relative_freqs(work_chunks)
    c_counts, c_total = _side_relative_freqs(candidate_chunks)
    if w_total == 0 or c_total == 0:
        raise UnmaskingError("a side has no words")
    avg = {
        t: (w_counts.get(t, 0) / w_total + c_counts.get(t, 0) / c_total) / 2.0
        for t in set(w_counts) | set(c_counts)
    }
    vocab = sorted(avg, key=lambda t: (-avg[t], t))[:cfg.n]
    index = {t: i for i, t in enumerate(vocab)}
    all_chunks = list(work_chunks) + list(candidate_chunks)
    labels = ["work"] * len(work_chunks) + ["candidate"] * len(candidate_chunks)
    values = np.zeros((len(all_chunks), len(vocab)))
    ids = []
    for r, chunk in enumerate(all_chunks):
        ids.append(f"{chunk.doc_id}:{chunk.index}")
        for tok in chunk.tokens:
            c = index.get(tok)
            if c is not None:
                values[r, c] += 1.0
        values[r] /= len(chunk.tokens)
    fm = FeatureMatrix(
        sample_ids=ids,
        feature_names=list(vocab),
        values=values,
        spec=FeatureSpec(kind="bow", mfw=cfg.n),
    )
    return fm, labels


# The trainer's default schedule (lam=1e-4) needs far more than its epoch
# budget here: pair models see relative frequencies two orders below unit
# scale, and the meta model sees few, imbalanced curves.  lam=0.01 makes
# both converge; larger values collapse the meta to the majority class.
_SVM_PARAMS = {"lam": 0.01}


def unmask_pair(
    work_chunks: Sequence[Chunk],
    candidate_chunks: Sequence[Chunk],
    cfg: UnmaskingConfig,
    pair: tuple[str, str] = ("work", "candidate"),
    remove_least: bool = False,
) -> DegradationCurve:
    """Degradation curve for one pair.

    Each step fits a linear SVM on the live features, records its
    cross-validated accuracy, then removes the k largest-positive and k
    largest-negative signed weights.  ``remove_least`` flips to removing
    the 2k smallest-magnitude weights, the ablation baseline that should
    degrade far slower.
    """
    fm, labels = pair_features(work_chunks, candidate_chunks, cfg)
    X = fm.values
    n0 = X.shape[1]
    if n0 <= 2 * cfg.k * cfg.m:
        raise UnmaskingError(
            f"pair vocabulary has {n0} words, not enough for "
            f"{cfg.m} steps removing {2 * cfg.k} each"
        )
    live = np.arange(n0)
    accuracies: list[float] = []
    live_counts: list[int] = []
    for step in range(cfg.m + 1):
        current = X[:, live]
        live_counts.append(live.size)
        report = cross_validate(
            "linear_svm", current, labels, folds=cfg.cv_folds,
            seed=cfg.seed, hyperparams=_SVM_PARAMS,
        )
        accuracies.append(report.accuracy)
        if step == cfg.m:
            break
        model = train("linear_svm", current, labels, _SVM_PARAMS, seed=cfg.seed)
        w = model.parameters["w"][:-1]
        if remove_least:
            drop_pos = np.argsort(np.abs(w), kind="stable")[: 2 * cfg.k]
        else:
            order = np.argsort(w, kind="stable")
            drop_pos = np.concatenate([order[: cfg.k], order[-cfg.k:]])
        keep = np.ones(live.size, dtype=bool)
        keep[drop_pos] = False
        live = live[keep]
    return DegradationCurve(
        pair=pair, accuracies=accuracies, live_counts=tuple(live_counts),
    )


def curve_features(curve: DegradationCurve) -> np.ndarray:
    """Meta-feature vector: the accuracies, their consecutive differences,
    and the largest single-step drop; dimension 2m + 2 for m steps."""
    acc = np.array(curve.accuracies, dtype=np.float64)
    diffs = np.diff(acc)
    max_drop = float((-diffs).max()) if diffs.size else 0.0
    return np.concatenate([acc, diffs, [max_drop]])


def _balance_side(
    chunks: Sequence[Chunk], target: int, key: str, seed: int,
) -> list[Chunk]:
    """Subsample an oversized side down to ``target`` chunks.

    The draw is keyed on the pair ids and the config seed only, never on
    how many pairs were built before, so every pair gets the same
    subsample regardless of corpus order.
    """
    if len(chunks) <= target:
        return list(chunks)
    rng = np.random.default_rng([seed, zlib.crc32(key.encode("utf-8"))])
    picked = rng.choice(len(chunks), size=target, replace=False)
    return [chunks[i] for i in sorted(picked)]


def build_curve_dataset(
    works: Sequence[tuple[str, str, Sequence[Chunk]]],
    cfg: UnmaskingConfig,
) -> CurveSet:
    """One labeled curve per (work, candidate author) pair.

    ``works`` rows are (work id, author, chunks).  When the work belongs
    to the candidate, it is removed from the candidate side first, so
    same-author curves measure the author's other works.  Both sides are
    then cut to a common size (the smaller side, but never below the
    fold count): a lopsided pair would hand the fold classifier a
    majority-class floor and flatten the very curves being measured.
    Pairs whose sides cannot fill the CV folds are skipped and reported.
    """
    if not works:
        raise UnmaskingError("no works given")
    ids = [w[0] for w in works]
    if len(set(ids)) != len(ids):
        raise UnmaskingError("duplicate work ids")
    authors = sorted({w[1] for w in works})
    per_author_works = {a: [w for w in works if w[1] == a] for a in authors}
    if not any(len(v) >= 2 for v in per_author_works.values()):
        raise UnmaskingError(
            "no author has two works; no same-author pairs are possible"
        )
    curves: list[DegradationCurve] = []
    skipped: list[tuple[str, str]] = []
    for work_id, author, chunks in works:
        for candidate in authors:
            cand_chunks: list[Chunk] = []
            for other_id, _, other_chunks in per_author_works[candidate]:
                if other_id == work_id:
                    continue
                cand_chunks.extend(other_chunks)
            if len(chunks) < cfg.cv_folds or len(cand_chunks) < cfg.cv_folds:
                skipped.append((work_id, candidate))
                continue
            target = max(min(len(chunks), len(cand_chunks)), cfg.cv_folds)
            work_side = _balance_side(
                chunks, target, f"{work_id}|{candidate}|work", cfg.seed,
            )
            cand_side = _balance_side(
                cand_chunks, target, f"{work_id}|{candidate}|cand", cfg.seed,
            )
            curve = unmask_pair(work_side, cand_side, cfg, pair=(work_id, candidate))
            curve.label = SAME_AUTHOR if candidate == author else DIFFERENT_AUTHOR
            curves.append(curve)
    if not curves:
        raise UnmaskingError("every pair was skipped; corpus too small")
    values = np.stack([curve_features(c) for c in curves])
    labels = [c.label for c in curves]
    counts = dict(Counter(labels))
    return CurveSet(
        curves=curves,
        values=values,
        labels=labels,
        class_counts=counts,
        skipped=skipped,
    )


def train_meta(dataset: CurveSet, cfg: UnmaskingConfig) -> TrainedModel:
    """Linear SVM over curve features, same trainer as the pair models."""
    if len(set(dataset.labels)) < 2:
        raise UnmaskingError(
            "curve dataset has a single class; need both same-author "
            "and different-author curves"
        )
    return train(
        "linear_svm", dataset.values, dataset.labels, _SVM_PARAMS,
        seed=cfg.seed,
    )


def verify(
    query_chunks: Sequence[Chunk],
    candidates: Mapping[str, Sequence[Chunk]],
    meta_model: TrainedModel,
    cfg: UnmaskingConfig,
    query_id: str = "query",
) -> Verdict:
    """Classify the query's degradation curve against every candidate.

    Sides are balanced the same way the curve dataset balances them, so
    query curves are commensurable with the training curves.  The verdict
    lists every candidate whose curve looks same-author; an empty list
    means no candidate matches.
    """
    if not candidates:
        raise UnmaskingError("no candidate authors given")
    per_candidate: dict[str, tuple[str, float]] = {}
    matched: list[str] = []
    for author in sorted(candidates):
        cand_chunks = candidates[author]
        target = max(min(len(query_chunks), len(cand_chunks)), cfg.cv_folds)
        query_side = _balance_side(
            query_chunks, target, f"{query_id}|{author}|work", cfg.seed,
        )
        cand_side = _balance_side(
            cand_chunks, target, f"{query_id}|{author}|cand", cfg.seed,
        )
        curve = unmask_pair(
            query_side, cand_side, cfg, pair=(query_id, author),
        )
        vec = curve_features(curve)[None, :]
        label = predict(meta_model, vec)[0]
        scores = decision_scores(meta_model, vec)[0]
        same_col = meta_model.class_labels.index(SAME_AUTHOR)
        score = float(scores[same_col])
        per_candidate[author] = (label, score)
        if label == SAME_AUTHOR:
            matched.append(author)
    return Verdict(per_candidate=per_candidate, matched=matched)


def save_curves_csv(curves: Sequence[DegradationCurve], path: str) -> None:
    """Long-form CSV: work, candidate, label, step, accuracy."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["work", "candidate", "label", "step", "accuracy"])
        for curve in curves:
            for step, acc in enumerate(curve.accuracies):
                writer.writerow([
                    curve.pair[0], curve.pair[1], curve.label or "", step, repr(acc),
                ])


def save_curves_json(curves: Sequence[DegradationCurve], path: str) -> None:
    payload = [
        {
            "work": c.pair[0],
            "candidate": c.pair[1],
            "label": c.label,
            "accuracies": [float(a) for a in c.accuracies],
        }
        for c in curves
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, indent=2)
        fh.write("\n")
