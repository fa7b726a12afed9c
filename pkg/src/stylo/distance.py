"""Delta-family distances, agglomerative dendrograms, and the
(mfw x culling x kind) separation grid.

Distance kinds, with a named formula each:

* ``burrows``: mean absolute difference of z-scores.
* ``eder``: rank-weighted absolute difference of z-scores; term at
  vocabulary rank r (1-based) gets weight (N - r + 1) / N, the weighted
  sum divided by N.
* ``eder_simple``: Manhattan distance on element-wise square roots of
  relative frequencies, no z-scoring.
* ``cosine_delta``: 1 - cosine similarity of z-scores.
* ``euclidean``, ``manhattan``, ``canberra``: textbook forms.

Smaller values mean more similar samples throughout.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import _kernels
from .features import FeatureMatrix, FeatureSpec, TokenStream, build_vocabulary, extract, zscore

__all__ = [
    "DistanceError",
    "DELTA_KINDS",
    "DistanceMatrix",
    "Dendrogram",
    "SeparationScore",
    "GridRow",
    "delta",
    "pairwise",
    "cluster",
    "separation",
    "delta_grid",
    "dendrogram_dot",
    "dendrogram_json",
    "save_distance_csv",
    "load_distance_csv",
]


class DistanceError(Exception):
    """Invalid input to a distance computation."""


DELTA_KINDS = (
    "burrows",
    "eder",
    "eder_simple",
    "cosine_delta",
    "euclidean",
    "manhattan",
    "canberra",
)

# Kinds computed on z-scored columns; eder_simple alone works on raw
# relative frequencies.
_ZSCORED_KINDS = frozenset(DELTA_KINDS) - {"eder_simple"}

_KERNEL_CODES = {
    "burrows": _kernels.MEAN_ABS,
    "eder": _kernels.WEIGHTED_ABS,
    "eder_simple": _kernels.MANHATTAN,
    "cosine_delta": _kernels.COSINE,
    "euclidean": _kernels.EUCLIDEAN,
    "manhattan": _kernels.MANHATTAN,
    "canberra": _kernels.CANBERRA,
}


@dataclass
class DistanceMatrix:
    """Symmetric pairwise distances with aligned sample ids."""

    ids: list[str]
    values: np.ndarray
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        n = len(self.ids)
        if self.values.shape != (n, n):
            raise DistanceError(f"matrix shape {self.values.shape} for {n} ids")
        if not np.all(np.isfinite(self.values)):
            raise DistanceError("distance matrix contains non-finite entries")
        if np.any(self.values < 0.0):
            raise DistanceError("distance matrix contains negative entries")
        if np.any(np.diagonal(self.values) != 0.0):
            raise DistanceError("distance matrix diagonal must be zero")
        if not np.array_equal(self.values, self.values.T):
            raise DistanceError("distance matrix must be symmetric")


@dataclass
class Dendrogram:
    """Agglomerative merge sequence.

    Leaves are numbered 0..n-1 in id order; each merge creates node
    n, n+1, ... so node ids match the scipy convention.
    """

    merges: list[tuple[int, int, float, int]]
    leaf_ids: list[str]

    def __post_init__(self) -> None:
        if len(self.merges) != len(self.leaf_ids) - 1:
            raise DistanceError(
                f"{len(self.leaf_ids)} leaves need {len(self.leaf_ids) - 1} "
                f"merges, got {len(self.merges)}"
            )


@dataclass(frozen=True)
class SeparationScore:
    """How far apart same-author and cross-author distances sit.

    ``raw_difference`` is outgroup mean minus ingroup mean;
    ``standardized_difference`` divides by the pooled sd (infinite when
    both groups are constant but unequal).  Larger is better.
    """

    ingroup_mean: float
    outgroup_mean: float
    pooled_sd: float
    raw_difference: float
    standardized_difference: float


@dataclass(frozen=True)
class GridRow:
    mfw: int
    culling: float
    kind: str
    score: SeparationScore


def _eder_weights(d: int) -> np.ndarray:
    # (N - rank + 1) / N per term, folded with the final 1/N so the kernel's
    # plain weighted sum yields the finished value.
    ranks = np.arange(1, d + 1, dtype=np.float64)
    return (d - ranks + 1.0) / (d * d)


def delta(a: np.ndarray, b: np.ndarray, kind: str) -> float:
    """Scalar distance between two feature vectors.

    Callers provide z-scored vectors for the kinds that assume them
    (burrows, eder, cosine_delta) and non-negative relative frequencies
    for eder_simple.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size < 1:
        raise DistanceError(f"need equal-length vectors, got {a.shape} and {b.shape}")
    if kind == "burrows":
        return float(np.mean(np.abs(a - b)))
    if kind == "eder":
        return float(np.abs(a - b) @ _eder_weights(a.size))
    if kind == "eder_simple":
        if np.any(a < 0.0) or np.any(b < 0.0):
            raise DistanceError("eder_simple needs non-negative frequencies")
        return float(np.sum(np.abs(np.sqrt(a) - np.sqrt(b))))
    if kind == "cosine_delta":
        na = float(np.linalg.norm(a))
        nb = float(np.linalg.norm(b))
        if na == 0.0 or nb == 0.0:
            raise DistanceError("cosine_delta is undefined for a zero vector")
        if np.array_equal(a, b):
            # the quotient can land an ulp under 1; identity must be exact
            return 0.0
        return max(0.0, 1.0 - float(a @ b) / (na * nb))
    if kind == "euclidean":
        return float(np.linalg.norm(a - b))
    if kind == "manhattan":
        return float(np.sum(np.abs(a - b)))
    if kind == "canberra":
        num = np.abs(a - b)
        den = np.abs(a) + np.abs(b)
        terms = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
        return float(terms.sum())
    raise DistanceError(f"unknown distance kind: {kind!r}")


def pairwise(matrix: FeatureMatrix, kind: str) -> DistanceMatrix:
    """Full symmetric distance matrix over the samples of a feature matrix.

    Kinds that assume z-scores standardize the matrix first (unless it
    already is); eder_simple requires unscaled relative frequencies.
    """
    if kind not in _KERNEL_CODES:
        raise DistanceError(f"unknown distance kind: {kind!r}")
    if matrix.n_samples < 2:
        raise DistanceError("pairwise distances need at least two samples")
    if kind == "eder_simple":
        if matrix.scaling == "zscore":
            raise DistanceError("eder_simple needs raw relative frequencies, not z-scores")
        if np.any(matrix.values < 0.0):
            raise DistanceError("eder_simple needs non-negative frequencies")
        X = np.sqrt(matrix.values)
    else:
        scaled = matrix if matrix.scaling == "zscore" else zscore(matrix)
        X = scaled.values
    if X.shape[1] < 1:
        raise DistanceError("no feature columns left to compare")
    if kind == "cosine_delta":
        norms = np.sqrt((X * X).sum(axis=1))
        if np.any(norms == 0.0):
            bad = [sid for sid, nv in zip(matrix.sample_ids, norms) if nv == 0.0]
            raise DistanceError(f"cosine_delta is undefined for zero vectors: {bad}")
    weights = _eder_weights(X.shape[1]) if kind == "eder" else None
    values = _kernels.pairwise_kernel(X, _KERNEL_CODES[kind], weights)
    # mirror the upper triangle so symmetry is exact, not just numerical
    upper = np.triu(values, k=1)
    values = upper + upper.T
    return DistanceMatrix(
        ids=list(matrix.sample_ids),
        values=values,
        kind=kind,
        params={"scaling": matrix.scaling, "n_features": int(X.shape[1])},
    )


def _pair_key(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


def cluster(dist: DistanceMatrix, linkage: str = "average") -> Dendrogram:
    """Agglomerative clustering with the chosen linkage.

    Ties on merge height break on the smallest (id, id) pair, so the
    dendrogram is reproducible for any input.
    """
    if linkage not in ("average", "complete", "single"):
        raise DistanceError(f"unknown linkage: {linkage!r}")
    n = len(dist.ids)
    if n < 2:
        raise DistanceError("clustering needs at least two samples")
    pair_d: dict[tuple[int, int], float] = {}
    for i in range(n):
        for j in range(i + 1, n):
            pair_d[(i, j)] = float(dist.values[i, j])
    sizes = {i: 1 for i in range(n)}
    active = set(range(n))
    merges: list[tuple[int, int, float, int]] = []
    next_id = n
    while len(active) > 1:
        (a, b), height = min(pair_d.items(), key=lambda kv: (kv[1], kv[0]))
        del pair_d[(a, b)]
        new = next_id
        next_id += 1
        active.discard(a)
        active.discard(b)
        for k in active:
            da = pair_d.pop(_pair_key(a, k))
            db = pair_d.pop(_pair_key(b, k))
            if linkage == "single":
                nd = min(da, db)
            elif linkage == "complete":
                nd = max(da, db)
            else:
                nd = (sizes[a] * da + sizes[b] * db) / (sizes[a] + sizes[b])
            pair_d[_pair_key(k, new)] = nd
        sizes[new] = sizes[a] + sizes[b]
        active.add(new)
        merges.append((a, b, height, new))
    return Dendrogram(merges=merges, leaf_ids=list(dist.ids))


def separation(dist: DistanceMatrix, labels: Sequence[str]) -> SeparationScore:
    """Split off-diagonal distances into same-author (ingroup) and
    cross-author (outgroup) pools and compare their means.

    The standardized difference divides by the pooled sd of the two
    pools (Cohen's-d style).
    """
    n = len(dist.ids)
    if len(labels) != n:
        raise DistanceError(f"{len(labels)} labels for {n} samples")
    ingroup: list[float] = []
    outgroup: list[float] = []
    for i in range(n):
        for j in range(i + 1, n):
            v = float(dist.values[i, j])
            if labels[i] == labels[j]:
                ingroup.append(v)
            else:
                outgroup.append(v)
    if not ingroup:
        raise DistanceError("no same-author pairs to form an ingroup")
    if not outgroup:
        raise DistanceError("need at least two authors for an outgroup")
    gin = np.array(ingroup)
    gout = np.array(outgroup)
    raw = float(gout.mean() - gin.mean())
    dof = len(gin) + len(gout) - 2
    if dof > 0:
        ssq = 0.0
        if len(gin) > 1:
            ssq += (len(gin) - 1) * float(gin.var(ddof=1))
        if len(gout) > 1:
            ssq += (len(gout) - 1) * float(gout.var(ddof=1))
        pooled = math.sqrt(ssq / dof)
    else:
        pooled = 0.0
    if pooled > 0.0:
        std = raw / pooled
    else:
        std = math.inf if raw > 0 else (-math.inf if raw < 0 else 0.0)
    return SeparationScore(
        ingroup_mean=float(gin.mean()),
        outgroup_mean=float(gout.mean()),
        pooled_sd=pooled,
        raw_difference=raw,
        standardized_difference=std,
    )


def delta_grid(
    streams: Sequence[TokenStream],
    labels: Sequence[str],
    mfw_grid: Sequence[int],
    culling_grid: Sequence[float],
    kinds: Sequence[str] = DELTA_KINDS,
) -> list[GridRow]:
    """Exhaustive separation scores over every (mfw, culling, kind) cell.

    Each cell rebuilds the word vocabulary at its mfw and culling,
    extracts relative frequencies, and scores the resulting distances.
    Rows come back sorted by standardized difference, best first, with
    deterministic tie-breaks on (mfw, culling, kind).
    """
    if not mfw_grid or not culling_grid or not kinds:
        raise DistanceError("grids must be non-empty")
    for kind in kinds:
        if kind not in _KERNEL_CODES:
            raise DistanceError(f"unknown distance kind: {kind!r}")
    rows: list[GridRow] = []
    for mfw in mfw_grid:
        for culling in culling_grid:
            vocab = build_vocabulary(streams, unit="word", mfw=mfw, culling=culling)
            spec = FeatureSpec(kind="bow", mfw=mfw, culling=culling)
            fm = extract(streams, spec, vocab)
            for kind in kinds:
                dist = pairwise(fm, kind)
                score = separation(dist, labels)
                rows.append(GridRow(mfw=int(mfw), culling=float(culling), kind=kind, score=score))
    rows.sort(key=lambda r: (-r.score.standardized_difference, r.mfw, r.culling, r.kind))
    return rows


def dendrogram_json(dend: Dendrogram) -> str:
    """Merge list as JSON: leaves, then per-merge records."""
    payload = {
        "leaves": list(dend.leaf_ids),
        "merges": [
            {"left": a, "right": b, "height": h, "id": m}
            for a, b, h, m in dend.merges
        ],
    }
    return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"


def dendrogram_dot(dend: Dendrogram, unrooted: bool = False) -> str:
    """Graphviz rendering of the merge tree.

    Rooted output is a digraph from internal nodes (labeled by height)
    down to leaves; ``unrooted`` switches to an undirected graph with a
    neato layout hint, the usual presentation for compression trees.
    """
    lines: list[str] = []
    if unrooted:
        lines.append("graph dendrogram {")
        lines.append("  layout=neato;")
        edge = "--"
    else:
        lines.append("digraph dendrogram {")
        edge = "->"
    lines.append("  node [shape=box];")
    for i, leaf in enumerate(dend.leaf_ids):
        label = leaf.replace("\\", "\\\\").replace('"', '\\"')
        lines.append(f'  n{i} [label="{label}"];')
    for a, b, h, m in dend.merges:
        lines.append(f'  n{m} [label="{h:.6g}" shape=ellipse];')
        lines.append(f"  n{m} {edge} n{a};")
        lines.append(f"  n{m} {edge} n{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_distance_csv(dist: DistanceMatrix, path: str) -> None:
    """Square CSV with the id list as both header row and first column."""
    import csv as _csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["id"] + list(dist.ids))
        for sid, row in zip(dist.ids, dist.values):
            writer.writerow([sid] + [repr(float(v)) for v in row])


def load_distance_csv(path: str, kind: str = "loaded") -> DistanceMatrix:
    import csv as _csv

    with open(path, encoding="utf-8", newline="") as fh:
        reader = _csv.reader(fh)
        header = next(reader)
        ids = header[1:]
        rows = []
        for line in reader:
            rows.append([float(v) for v in line[1:]])
    return DistanceMatrix(ids=ids, values=np.array(rows), kind=kind)
