"""PCA and LDA projections for low-dimensional views of feature matrices.

Both models store their projection directions as rows over the original
feature space, with a deterministic sign convention (the coordinate of
largest magnitude in each direction is positive) so repeated runs and
golden files agree exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .features import FeatureMatrix

__all__ = [
    "ProjectionError",
    "ProjectionModel",
    "ProjectedPoints",
    "fit_pca",
    "fit_lda",
    "transform",
    "inverse_transform",
    "save_points_csv",
]


class ProjectionError(Exception):
    """Invalid input to a projection fit or transform."""


@dataclass
class ProjectionModel:
    """A fitted linear projection.

    ``components`` has one direction per row.  ``explained_variance_ratio``
    is populated for PCA only, ``class_labels`` for LDA only.
    """

    kind: str
    components: np.ndarray
    means: np.ndarray
    explained_variance_ratio: list[float] = field(default_factory=list)
    class_labels: list[str] = field(default_factory=list)

    @property
    def k(self) -> int:
        return int(self.components.shape[0])


@dataclass
class ProjectedPoints:
    """Samples in projection coordinates."""

    sample_ids: list[str]
    coordinates: np.ndarray
    labels: list[str]

    def __post_init__(self) -> None:
        self.coordinates = np.asarray(self.coordinates, dtype=np.float64)
        n = len(self.sample_ids)
        if self.coordinates.shape[0] != n:
            raise ProjectionError(
                f"{self.coordinates.shape[0]} coordinate rows for {n} ids"
            )
        if self.labels and len(self.labels) != n:
            raise ProjectionError(f"{len(self.labels)} labels for {n} ids")


def _fix_signs(components: np.ndarray) -> np.ndarray:
    """Flip each row so its largest-magnitude entry is positive."""
    out = components.copy()
    for r in range(out.shape[0]):
        j = int(np.argmax(np.abs(out[r])))
        if out[r, j] < 0.0:
            out[r] = -out[r]
    return out


def fit_pca(matrix: FeatureMatrix, k: int) -> ProjectionModel:
    """Top-k principal directions of the centered data.

    Components are orthonormal; explained variance ratios are each
    eigenvalue over the total variance, non-increasing by construction.
    """
    X = matrix.values
    n, d = X.shape
    if n < 2:
        raise ProjectionError("PCA needs at least two samples")
    if not (1 <= k <= min(n - 1, d)):
        raise ProjectionError(
            f"k={k} outside valid range 1..{min(n - 1, d)} "
            f"for {n} samples x {d} features"
        )
    if not np.all(np.isfinite(X)):
        raise ProjectionError("feature matrix contains non-finite values")
    means = X.mean(axis=0)
    Xc = X - means
    cov = (Xc.T @ Xc) / (n - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    total = float(eigvals.clip(min=0.0).sum())
    components = _fix_signs(eigvecs[:, :k].T)
    if total > 0.0:
        ratios = [float(max(v, 0.0) / total) for v in eigvals[:k]]
    else:
        ratios = [0.0] * k
    return ProjectionModel(
        kind="pca",
        components=components,
        means=means,
        explained_variance_ratio=ratios,
    )


def fit_lda(matrix: FeatureMatrix, labels: Sequence[str], k: int) -> ProjectionModel:
    """Fisher discriminant directions from within/between class scatter.

    The within-class scatter is regularized by (1e-6 * trace / dim) * I
    before whitening; high-dimensional text features make it singular
    otherwise.
    """
    X = matrix.values
    n, d = X.shape
    if len(labels) != n:
        raise ProjectionError(f"{len(labels)} labels for {n} samples")
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise ProjectionError("LDA needs at least two classes")
    for c in classes:
        if sum(1 for y in labels if y == c) < 2:
            raise ProjectionError(f"class {c!r} has fewer than two samples")
    if not (1 <= k <= len(classes) - 1):
        raise ProjectionError(
            f"k={k} outside valid range 1..{len(classes) - 1} for {len(classes)} classes"
        )
    if not np.all(np.isfinite(X)):
        raise ProjectionError("feature matrix contains non-finite values")
    means = X.mean(axis=0)
    Sw = np.zeros((d, d))
    Sb = np.zeros((d, d))
    for c in classes:
        rows = X[np.array([y == c for y in labels])]
        mu_c = rows.mean(axis=0)
        centered = rows - mu_c
        Sw += centered.T @ centered
        gap = (mu_c - means)[:, None]
        Sb += rows.shape[0] * (gap @ gap.T)
    lam = 1e-6 * float(np.trace(Sw)) / d
    Sw_reg = Sw + lam * np.eye(d)
    wvals, wvecs = np.linalg.eigh(Sw_reg)
    wvals = np.maximum(wvals, 1e-30)
    whiten = wvecs @ np.diag(1.0 / np.sqrt(wvals)) @ wvecs.T
    M = whiten @ Sb @ whiten
    M = (M + M.T) / 2.0
    evals, evecs = np.linalg.eigh(M)
    order = np.argsort(evals)[::-1]
    directions = (whiten @ evecs[:, order[:k]]).T
    norms = np.sqrt((directions * directions).sum(axis=1))
    norms = np.where(norms == 0.0, 1.0, norms)
    directions = directions / norms[:, None]
    return ProjectionModel(
        kind="lda",
        components=_fix_signs(directions),
        means=means,
        class_labels=list(classes),
    )


def transform(
    model: ProjectionModel,
    matrix: FeatureMatrix,
    labels: Sequence[str] | None = None,
) -> ProjectedPoints:
    """Center by the model means and project onto its components."""
    X = matrix.values
    if X.shape[1] != model.components.shape[1]:
        raise ProjectionError(
            f"matrix has {X.shape[1]} features, model expects "
            f"{model.components.shape[1]}"
        )
    coords = (X - model.means) @ model.components.T
    return ProjectedPoints(
        sample_ids=list(matrix.sample_ids),
        coordinates=coords,
        labels=list(labels) if labels is not None else [],
    )


def inverse_transform(model: ProjectionModel, points: ProjectedPoints) -> np.ndarray:
    """Map projection coordinates back into feature space.

    Exact reconstruction only when the model keeps a full basis.
    """
    if points.coordinates.shape[1] != model.k:
        raise ProjectionError(
            f"points have {points.coordinates.shape[1]} coordinates, "
            f"model has {model.k} components"
        )
    return points.coordinates @ model.components + model.means


def save_points_csv(points: ProjectedPoints, path: str) -> None:
    """CSV rows: id, label, c1..ck."""
    k = points.coordinates.shape[1]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "label"] + [f"c{i + 1}" for i in range(k)])
        labels = points.labels if points.labels else [""] * len(points.sample_ids)
        for sid, lab, row in zip(points.sample_ids, labels, points.coordinates):
            writer.writerow([sid, lab] + [repr(float(v)) for v in row])
