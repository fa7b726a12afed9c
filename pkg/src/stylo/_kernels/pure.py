"""Numpy fallback for the compiled kernel core.

Same contracts as ``stylo._kernels._core``; results agree with the compiled
versions to floating-point tolerance (summation order differs).
"""

from __future__ import annotations

import numpy as np

MEAN_ABS = 0
WEIGHTED_ABS = 1
MANHATTAN = 2
EUCLIDEAN = 3
CANBERRA = 4
COSINE = 5


def pairwise_kernel(X: np.ndarray, kind: int, weights: np.ndarray | None = None) -> np.ndarray:
    """Symmetric pairwise distance matrix over the rows of X.

    kind selects the summand; weights is only read for WEIGHTED_ABS.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    n, d = X.shape
    out = np.zeros((n, n), dtype=np.float64)
    if kind == COSINE:
        norms = np.sqrt(np.einsum("ij,ij->i", X, X))
        gram = X @ X.T
        denom = np.outer(norms, norms)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = 1.0 - gram / denom
        np.maximum(out, 0.0, out=out)
        np.fill_diagonal(out, 0.0)
        return out
    for i in range(n):
        diff = np.abs(X[i + 1:] - X[i])
        if kind == MEAN_ABS:
            row = diff.sum(axis=1) / d
        elif kind == WEIGHTED_ABS:
            row = diff @ weights
        elif kind == MANHATTAN:
            row = diff.sum(axis=1)
        elif kind == EUCLIDEAN:
            row = np.sqrt((diff * diff).sum(axis=1))
        elif kind == CANBERRA:
            denom = np.abs(X[i + 1:]) + np.abs(X[i])
            terms = np.divide(diff, denom, out=np.zeros_like(diff), where=denom > 0)
            row = terms.sum(axis=1)
        else:
            raise ValueError(f"unknown kernel kind code {kind}")
        out[i, i + 1:] = row
        out[i + 1:, i] = row
    return out


def hinge_fullbatch(X: np.ndarray, y: np.ndarray, epochs: int, lam: float) -> np.ndarray:
    """Full-batch subgradient descent on L2-regularized hinge loss.

    y in {-1,+1}; step schedule 1/(lam*t). Returns the weight vector.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n, d = X.shape
    w = np.zeros(d, dtype=np.float64)
    for t in range(1, epochs + 1):
        eta = 1.0 / (lam * t)
        margin = y * (X @ w)
        viol = margin < 1.0
        w *= 1.0 - 1.0 / t
        if viol.any():
            w += (eta / n) * (y[viol] @ X[viol])
    return w


def hinge_sgd(X: np.ndarray, y: np.ndarray, orders: np.ndarray, lam: float) -> np.ndarray:
    """Single-sample hinge updates in the given per-epoch visit orders.

    orders has shape (epochs, n); the step counter runs across epochs.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    orders = np.ascontiguousarray(orders, dtype=np.int64)
    d = X.shape[1]
    w = np.zeros(d, dtype=np.float64)
    t = 1
    for epoch in range(orders.shape[0]):
        for i in orders[epoch]:
            eta = 1.0 / (lam * t)
            s = float(X[i] @ w)
            w *= 1.0 - 1.0 / t
            if y[i] * s < 1.0:
                w += eta * y[i] * X[i]
            t += 1
    return w
