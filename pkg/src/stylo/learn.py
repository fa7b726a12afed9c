"""From-scratch supervised classifiers with cross-validated evaluation.

Eight classifier kinds share one train/predict interface: ridge
regression on one-hot targets, Bernoulli and multinomial naive Bayes,
nearest centroid, hinge-loss SVMs (full-batch linear, kernelized RBF,
and per-sample SGD), and multinomial logistic regression.  Everything is
deterministic given the seed; no training step consults global state.

Multiclass strategy: ridge and maxent are natively multinomial,
sgd_hinge goes one-vs-all with a max-wins vote, and both SVMs go
one-vs-one with winner-takes-all.  Prediction ties always break toward
the lexicographically smallest label.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import _kernels
from .features import FeatureMatrix

__all__ = [
    "LearnError",
    "WeightAccessError",
    "CLASSIFIER_KINDS",
    "LINEAR_KINDS",
    "TrainedModel",
    "ConfusionMatrix",
    "EvaluationReport",
    "AttributionRun",
    "AttributionResult",
    "train",
    "predict",
    "decision_scores",
    "weights",
    "metrics",
    "stratified_folds",
    "cross_validate",
    "attribute",
]


class LearnError(Exception):
    """Invalid input to training, prediction, or evaluation."""


class WeightAccessError(LearnError):
    """Per-feature weights were requested from a non-linear model."""


CLASSIFIER_KINDS = (
    "ridge",
    "bernoulli_nb",
    "multinomial_nb",
    "nearest_centroid",
    "linear_svm",
    "svm_rbf",
    "maxent",
    "sgd_hinge",
)

LINEAR_KINDS = frozenset({"ridge", "linear_svm", "maxent", "sgd_hinge"})

_DEFAULT_HYPERPARAMS: dict[str, dict] = {
    "ridge": {"alpha": 1.0},
    "bernoulli_nb": {"alpha": 1.0},
    "multinomial_nb": {"alpha": 1.0},
    "nearest_centroid": {},
    "linear_svm": {"epochs": 500, "lam": 1e-4},
    "svm_rbf": {"epochs": 500, "lam": 1e-4, "gamma": None},
    "maxent": {"lam": 1e-4, "max_iter": 1000, "tol": 1e-8},
    "sgd_hinge": {"epochs": 20, "lam": 1e-4},
}


@dataclass
class TrainedModel:
    """A fitted classifier: kind, class list, and kind-specific parameters."""

    kind: str
    class_labels: list[str]
    parameters: dict
    spec: dict = field(default_factory=dict)

    @property
    def n_features(self) -> int:
        return int(self.parameters["n_features"])


@dataclass
class ConfusionMatrix:
    """Rows are truth, columns predictions, both in label order."""

    labels: list[str]
    counts: np.ndarray

    def __post_init__(self) -> None:
        self.counts = np.asarray(self.counts, dtype=np.int64)
        n = len(self.labels)
        if self.counts.shape != (n, n):
            raise LearnError(f"counts shape {self.counts.shape} for {n} labels")
        if np.any(self.counts < 0):
            raise LearnError("confusion counts must be non-negative")

    @classmethod
    def from_pairs(
        cls,
        truth: Sequence[str],
        predicted: Sequence[str],
        labels: Sequence[str] | None = None,
    ) -> "ConfusionMatrix":
        if len(truth) != len(predicted):
            raise LearnError(f"{len(truth)} truths vs {len(predicted)} predictions")
        if labels is None:
            labels = sorted(set(truth) | set(predicted))
        index = {lab: i for i, lab in enumerate(labels)}
        counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
        for t, p in zip(truth, predicted):
            counts[index[t], index[p]] += 1
        return cls(labels=list(labels), counts=counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass
class EvaluationReport:
    """Metric suite over one confusion matrix.

    ``mcc`` is populated for binary tasks only.  ``degenerate`` is set
    when any zero-denominator convention fired, so a reported 0 can be
    told apart from a computed one.
    """

    confusion: ConfusionMatrix
    per_class: dict[str, dict[str, float]]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    micro_precision: float
    micro_recall: float
    micro_f1: float
    accuracy: float
    mcc: float | None
    degenerate: bool
    fold_assignments: list[int] | None = None
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "labels": list(self.confusion.labels),
            "confusion": self.confusion.counts.tolist(),
            "per_class": self.per_class,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "micro_precision": self.micro_precision,
            "micro_recall": self.micro_recall,
            "micro_f1": self.micro_f1,
            "accuracy": self.accuracy,
            "mcc": self.mcc,
            "degenerate": self.degenerate,
            "fold_assignments": self.fold_assignments,
            "seed": self.seed,
        }


def _as_array(features: FeatureMatrix | np.ndarray) -> np.ndarray:
    X = features.values if isinstance(features, FeatureMatrix) else np.asarray(features)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise LearnError(f"features must be 2-D, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise LearnError("features contain NaN or infinite values")
    return X


def _augment(X: np.ndarray) -> np.ndarray:
    """Append a constant 1.0 column so linear models carry a bias term."""
    return np.hstack([X, np.ones((X.shape[0], 1))])


def _check_training_input(X: np.ndarray, labels: Sequence[str]) -> list[str]:
    if len(labels) != X.shape[0]:
        raise LearnError(f"{len(labels)} labels for {X.shape[0]} samples")
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise LearnError("training needs at least two classes")
    return classes


def _rbf_gram(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    aa = (A * A).sum(axis=1)[:, None]
    bb = (B * B).sum(axis=1)[None, :]
    sq = aa + bb - 2.0 * (A @ B.T)
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


def _kernel_hinge_fullbatch(K: np.ndarray, y: np.ndarray, epochs: int, lam: float) -> np.ndarray:
    """Function-space mirror of the linear full-batch hinge trainer."""
    n = K.shape[0]
    beta = np.zeros(n, dtype=np.float64)
    for t in range(1, epochs + 1):
        eta = 1.0 / (lam * t)
        f = K @ beta
        viol = y * f < 1.0
        beta *= 1.0 - 1.0 / t
        if viol.any():
            beta[viol] += (eta / n) * y[viol]
    return beta


def _binary_targets(labels: Sequence[str], positive: str) -> np.ndarray:
    return np.array([1.0 if lab == positive else -1.0 for lab in labels])


def _sgd_orders(rng: np.random.Generator, epochs: int, n: int) -> np.ndarray:
    return np.stack([rng.permutation(n) for _ in range(epochs)])


def train(
    kind: str,
    features: FeatureMatrix | np.ndarray,
    labels: Sequence[str],
    hyperparams: Mapping | None = None,
    seed: int = 0,
) -> TrainedModel:
    """Fit one classifier.  Deterministic for a fixed seed."""
    if kind not in CLASSIFIER_KINDS:
        raise LearnError(f"unknown classifier kind: {kind!r}")
    X = _as_array(features)
    classes = _check_training_input(X, labels)
    hp = dict(_DEFAULT_HYPERPARAMS[kind])
    if hyperparams:
        unknown = set(hyperparams) - set(hp)
        if unknown:
            raise LearnError(f"unknown hyperparameters for {kind}: {sorted(unknown)}")
        hp.update(hyperparams)
    n, d = X.shape
    params: dict = {"n_features": d}
    spec = {"seed": seed, "hyperparams": dict(hp)}

    if kind == "ridge":
        Xa = _augment(X)
        Y = np.zeros((n, len(classes)))
        index = {c: i for i, c in enumerate(classes)}
        for r, lab in enumerate(labels):
            Y[r, index[lab]] = 1.0
        A = Xa.T @ Xa + hp["alpha"] * np.eye(d + 1)
        params["W"] = np.linalg.solve(A, Xa.T @ Y)

    elif kind == "bernoulli_nb":
        B = (X > 0.0).astype(np.float64)
        a = hp["alpha"]
        log_prior = np.empty(len(classes))
        log_theta = np.empty((len(classes), d))
        log_one_minus = np.empty((len(classes), d))
        for i, c in enumerate(classes):
            rows = B[np.array([lab == c for lab in labels])]
            nc = rows.shape[0]
            theta = (rows.sum(axis=0) + a) / (nc + 2.0 * a)
            log_prior[i] = math.log(nc / n)
            log_theta[i] = np.log(theta)
            log_one_minus[i] = np.log1p(-theta)
        params.update(log_prior=log_prior, log_theta=log_theta, log_one_minus=log_one_minus)

    elif kind == "multinomial_nb":
        if np.any(X < 0.0):
            raise LearnError("multinomial_nb needs non-negative count features")
        a = hp["alpha"]
        log_prior = np.empty(len(classes))
        log_theta = np.empty((len(classes), d))
        for i, c in enumerate(classes):
            rows = X[np.array([lab == c for lab in labels])]
            totals = rows.sum(axis=0) + a
            log_prior[i] = math.log(rows.shape[0] / n)
            log_theta[i] = np.log(totals / totals.sum())
        params.update(log_prior=log_prior, log_theta=log_theta)

    elif kind == "nearest_centroid":
        centroids = np.stack([
            X[np.array([lab == c for lab in labels])].mean(axis=0)
            for c in classes
        ])
        params["centroids"] = centroids

    elif kind == "linear_svm":
        Xa = _augment(X)
        if len(classes) == 2:
            y = _binary_targets(labels, classes[1])
            params["w"] = _kernels.hinge_fullbatch(Xa, y, hp["epochs"], hp["lam"])
        else:
            pair_weights = {}
            for i, a_lab in enumerate(classes):
                for b_lab in classes[i + 1:]:
                    mask = np.array([lab in (a_lab, b_lab) for lab in labels])
                    y = _binary_targets([lab for lab in labels if lab in (a_lab, b_lab)], b_lab)
                    pair_weights[(a_lab, b_lab)] = _kernels.hinge_fullbatch(
                        Xa[mask], y, hp["epochs"], hp["lam"],
                    )
            params["pair_weights"] = pair_weights

    elif kind == "svm_rbf":
        gamma = hp["gamma"] if hp["gamma"] is not None else 1.0 / d
        params["gamma"] = gamma
        if len(classes) == 2:
            K = _rbf_gram(X, X, gamma)
            y = _binary_targets(labels, classes[1])
            params["X_train"] = X.copy()
            params["beta"] = _kernel_hinge_fullbatch(K, y, hp["epochs"], hp["lam"])
        else:
            pair_models = {}
            for i, a_lab in enumerate(classes):
                for b_lab in classes[i + 1:]:
                    mask = np.array([lab in (a_lab, b_lab) for lab in labels])
                    sub = X[mask]
                    y = _binary_targets([lab for lab in labels if lab in (a_lab, b_lab)], b_lab)
                    K = _rbf_gram(sub, sub, gamma)
                    beta = _kernel_hinge_fullbatch(K, y, hp["epochs"], hp["lam"])
                    pair_models[(a_lab, b_lab)] = (sub, beta)
            params["pair_models"] = pair_models

    elif kind == "maxent":
        Xa = _augment(X)
        c = len(classes)
        index = {lab: i for i, lab in enumerate(classes)}
        yi = np.array([index[lab] for lab in labels])
        W = np.zeros((d + 1, c))
        lam = hp["lam"]
        # gradient of mean log-loss is (0.25 * ||X||_2^2 / n + lam)-Lipschitz
        lip = 0.25 * float(np.linalg.norm(Xa, 2)) ** 2 / n + lam
        step = 1.0 / lip
        onehot = np.zeros((n, c))
        onehot[np.arange(n), yi] = 1.0
        for _ in range(hp["max_iter"]):
            logits = Xa @ W
            logits -= logits.max(axis=1, keepdims=True)
            expl = np.exp(logits)
            probs = expl / expl.sum(axis=1, keepdims=True)
            grad = Xa.T @ (probs - onehot) / n + lam * W
            W -= step * grad
            if float(np.abs(grad).max()) < hp["tol"]:
                break
        params["W"] = W

    elif kind == "sgd_hinge":
        Xa = _augment(X)
        rng = np.random.default_rng(seed)
        if len(classes) == 2:
            orders = _sgd_orders(rng, hp["epochs"], n)
            y = _binary_targets(labels, classes[1])
            params["w"] = _kernels.hinge_sgd(Xa, y, orders, hp["lam"])
        else:
            W = np.empty((len(classes), d + 1))
            for i, c_lab in enumerate(classes):
                orders = _sgd_orders(rng, hp["epochs"], n)
                y = _binary_targets(labels, c_lab)
                W[i] = _kernels.hinge_sgd(Xa, y, orders, hp["lam"])
            params["ova_weights"] = W

    return TrainedModel(kind=kind, class_labels=classes, parameters=params, spec=spec)


def decision_scores(model: TrainedModel, features: FeatureMatrix | np.ndarray) -> np.ndarray:
    """Per-class scores, one row per sample, columns in class-label order.

    Higher is better for every kind; one-vs-one kinds report vote counts.
    """
    X = _as_array(features)
    if X.shape[1] != model.n_features:
        raise LearnError(
            f"feature dimension {X.shape[1]} does not match model "
            f"dimension {model.n_features}"
        )
    classes = model.class_labels
    p = model.parameters
    kind = model.kind

    if kind == "ridge":
        return _augment(X) @ p["W"]
    if kind == "bernoulli_nb":
        B = (X > 0.0).astype(np.float64)
        return (
            B @ p["log_theta"].T
            + (1.0 - B) @ p["log_one_minus"].T
            + p["log_prior"][None, :]
        )
    if kind == "multinomial_nb":
        return X @ p["log_theta"].T + p["log_prior"][None, :]
    if kind == "nearest_centroid":
        cent = p["centroids"]
        sq = ((X[:, None, :] - cent[None, :, :]) ** 2).sum(axis=2)
        return -np.sqrt(sq)
    if kind == "linear_svm":
        Xa = _augment(X)
        if "w" in p:
            f = Xa @ p["w"]
            return np.stack([-f, f], axis=1)
        return _ovo_votes(Xa, p["pair_weights"], classes, linear=True)
    if kind == "svm_rbf":
        if "beta" in p:
            f = _rbf_gram(X, p["X_train"], p["gamma"]) @ p["beta"]
            return np.stack([-f, f], axis=1)
        return _ovo_votes(X, p["pair_models"], classes, linear=False, gamma=p["gamma"])
    if kind == "maxent":
        return _augment(X) @ p["W"]
    if kind == "sgd_hinge":
        Xa = _augment(X)
        if "w" in p:
            f = Xa @ p["w"]
            return np.stack([-f, f], axis=1)
        return Xa @ p["ova_weights"].T
    raise LearnError(f"unknown classifier kind: {model.kind!r}")


def _ovo_votes(X, pair_params, classes, linear: bool, gamma: float = 0.0) -> np.ndarray:
    index = {c: i for i, c in enumerate(classes)}
    votes = np.zeros((X.shape[0], len(classes)))
    for (a_lab, b_lab), par in pair_params.items():
        if linear:
            f = X @ par
        else:
            sub, beta = par
            f = _rbf_gram(X, sub, gamma) @ beta
        # score 0 goes to the lexicographically smaller side
        b_wins = f > 0.0
        votes[b_wins, index[b_lab]] += 1.0
        votes[~b_wins, index[a_lab]] += 1.0
    return votes


def predict(model: TrainedModel, features: FeatureMatrix | np.ndarray) -> list[str]:
    """Predicted label per sample; score ties break to the smallest label."""
    scores = decision_scores(model, features)
    # argmax returns the first maximum and class columns are sorted, so the
    # lexicographic tie rule falls out for free
    picks = np.argmax(scores, axis=1)
    return [model.class_labels[i] for i in picks]


def weights(model: TrainedModel) -> tuple[np.ndarray, np.ndarray]:
    """Per-class feature weights and intercepts of a linear model.

    One-vs-one SVMs report each class's mean signed direction over the
    pairs it appears in.  Non-linear kinds refuse.
    """
    if model.kind not in LINEAR_KINDS:
        raise WeightAccessError(f"{model.kind} has no per-feature weights")
    p = model.parameters
    classes = model.class_labels
    d = model.n_features
    if model.kind in ("ridge", "maxent"):
        W = p["W"]
        return W[:d, :].T.copy(), W[d, :].copy()
    if "w" in p:
        w = p["w"]
        return np.stack([-w[:d], w[:d]]), np.array([-w[d], w[d]])
    if "ova_weights" in p:
        W = p["ova_weights"]
        return W[:, :d].copy(), W[:, d].copy()
    acc = np.zeros((len(classes), d + 1))
    counts = np.zeros(len(classes))
    index = {c: i for i, c in enumerate(classes)}
    for (a_lab, b_lab), w in p["pair_weights"].items():
        acc[index[b_lab]] += w
        acc[index[a_lab]] -= w
        counts[index[a_lab]] += 1
        counts[index[b_lab]] += 1
    acc /= counts[:, None]
    return acc[:, :d], acc[:, d]


def _prf(tp: float, fp: float, fn: float) -> tuple[float, float, float, bool]:
    degenerate = False
    if tp + fp > 0:
        precision = tp / (tp + fp)
    else:
        precision, degenerate = 0.0, True
    if tp + fn > 0:
        recall = tp / (tp + fn)
    else:
        recall, degenerate = 0.0, True
    if precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1, degenerate = 0.0, True
    return precision, recall, f1, degenerate


def metrics(cm: ConfusionMatrix) -> EvaluationReport:
    """Precision/recall/F1 per class with macro and micro averages,
    accuracy, and MCC for binary tasks.

    Zero denominators yield 0 and set the degenerate flag instead of
    raising.
    """
    counts = cm.counts
    total = cm.total
    if total == 0:
        raise LearnError("empty confusion matrix")
    per_class: dict[str, dict[str, float]] = {}
    degenerate = False
    tps = np.diagonal(counts).astype(np.float64)
    col_sums = counts.sum(axis=0).astype(np.float64)
    row_sums = counts.sum(axis=1).astype(np.float64)
    for i, lab in enumerate(cm.labels):
        tp = tps[i]
        fp = col_sums[i] - tp
        fn = row_sums[i] - tp
        precision, recall, f1, deg = _prf(tp, fp, fn)
        degenerate = degenerate or deg
        per_class[lab] = {"precision": precision, "recall": recall, "f1": f1}
    macro_p = float(np.mean([v["precision"] for v in per_class.values()]))
    macro_r = float(np.mean([v["recall"] for v in per_class.values()]))
    macro_f = float(np.mean([v["f1"] for v in per_class.values()]))
    tp_sum = float(tps.sum())
    micro_p, micro_r, micro_f, deg = _prf(
        tp_sum, float(col_sums.sum() - tp_sum), float(row_sums.sum() - tp_sum),
    )
    degenerate = degenerate or deg
    accuracy = tp_sum / total
    mcc: float | None = None
    if len(cm.labels) == 2:
        tn, fp = float(counts[0, 0]), float(counts[0, 1])
        fn, tp = float(counts[1, 0]), float(counts[1, 1])
        denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
        if denom > 0:
            mcc = (tp * tn - fp * fn) / math.sqrt(denom)
        else:
            mcc = 0.0
            degenerate = True
    return EvaluationReport(
        confusion=cm,
        per_class=per_class,
        macro_precision=macro_p,
        macro_recall=macro_r,
        macro_f1=macro_f,
        micro_precision=micro_p,
        micro_recall=micro_r,
        micro_f1=micro_f,
        accuracy=accuracy,
        mcc=mcc,
        degenerate=degenerate,
    )


def stratified_folds(labels: Sequence[str], folds: int, seed: int = 0) -> list[int]:
    """Fold index per sample.

    Each class is shuffled with the seed and dealt round-robin, so every
    fold sees every class when counts allow.  Classes smaller than the
    fold count force a plain shuffled deal over all samples, with a
    warning.
    """
    n = len(labels)
    if folds < 2:
        raise LearnError("need at least 2 folds")
    if folds > n:
        raise LearnError(f"{folds} folds for {n} samples")
    rng = np.random.default_rng(seed)
    by_class: dict[str, list[int]] = {}
    for i, lab in enumerate(labels):
        by_class.setdefault(lab, []).append(i)
    assignment = [0] * n
    if all(len(v) >= folds for v in by_class.values()):
        for lab in sorted(by_class):
            members = list(by_class[lab])
            rng.shuffle(members)
            for pos, idx in enumerate(members):
                assignment[idx] = pos % folds
    else:
        warnings.warn(
            "some class has fewer samples than folds; "
            "falling back to non-stratified assignment",
            stacklevel=2,
        )
        order = list(range(n))
        rng.shuffle(order)
        for pos, idx in enumerate(order):
            assignment[idx] = pos % folds
    return assignment


def cross_validate(
    kind: str,
    features: FeatureMatrix | np.ndarray,
    labels: Sequence[str],
    folds: int = 10,
    seed: int = 0,
    hyperparams: Mapping | None = None,
) -> EvaluationReport:
    """k-fold evaluation with metrics over the pooled out-of-fold
    predictions."""
    X = _as_array(features)
    _check_training_input(X, labels)
    assignment = stratified_folds(labels, folds, seed)
    assign_arr = np.array(assignment)
    all_labels = sorted(set(labels))
    truth: list[str] = []
    predicted: list[str] = []
    for f in range(folds):
        test_mask = assign_arr == f
        train_mask = ~test_mask
        if not test_mask.any():
            continue
        train_labels = [lab for lab, m in zip(labels, train_mask) if m]
        model = train(kind, X[train_mask], train_labels, hyperparams, seed)
        preds = predict(model, X[test_mask])
        truth.extend(lab for lab, m in zip(labels, test_mask) if m)
        predicted.extend(preds)
    cm = ConfusionMatrix.from_pairs(truth, predicted, all_labels)
    report = metrics(cm)
    report.fold_assignments = assignment
    report.seed = seed
    return report


@dataclass(frozen=True)
class AttributionRun:
    """One (classifier, feature set) attribution: chunk tally per candidate."""

    kind: str
    feature_set: str
    counts: dict[str, int]

    @property
    def total_chunks(self) -> int:
        return sum(self.counts.values())

    def winner(self) -> str:
        best = max(self.counts.values())
        return min(c for c, v in self.counts.items() if v == best)


@dataclass
class AttributionResult:
    """Aggregate over attribution runs: wins and average chunks per
    candidate, ranked by wins then average."""

    runs: list[AttributionRun]
    wins: dict[str, int]
    averages: dict[str, float]

    def ranking(self) -> list[tuple[str, int, float]]:
        candidates = sorted(self.averages)
        return sorted(
            [(c, self.wins.get(c, 0), self.averages[c]) for c in candidates],
            key=lambda row: (-row[1], -row[2], row[0]),
        )

    def to_dict(self) -> dict:
        return {
            "runs": [
                {"kind": r.kind, "feature_set": r.feature_set, "counts": r.counts}
                for r in self.runs
            ],
            "wins": self.wins,
            "averages": self.averages,
            "ranking": [
                {"candidate": c, "wins": w, "average_chunks": a}
                for c, w, a in self.ranking()
            ],
        }


def attribute(
    entries: Sequence[tuple[str, str, TrainedModel, FeatureMatrix | np.ndarray]],
) -> AttributionResult:
    """Assign query chunks under each (kind, feature set) run and tally.

    Each entry is (kind, feature_set, trained model, featurized query
    chunks).  A run's win goes to the candidate with the most chunks in
    that run; averages are per-candidate means over all runs.
    """
    if not entries:
        raise LearnError("attribution needs at least one run")
    runs: list[AttributionRun] = []
    for kind, feature_set, model, query in entries:
        Q = _as_array(query)
        if Q.shape[0] == 0:
            raise LearnError(f"run ({kind}, {feature_set}) has no query chunks")
        preds = predict(model, Q)
        counts = {c: 0 for c in model.class_labels}
        for lab in preds:
            counts[lab] += 1
        runs.append(AttributionRun(kind=kind, feature_set=feature_set, counts=counts))
    candidates = sorted({c for r in runs for c in r.counts})
    wins = {c: 0 for c in candidates}
    for r in runs:
        wins[r.winner()] += 1
    averages = {
        c: float(np.mean([r.counts.get(c, 0) for r in runs])) for c in candidates
    }
    return AttributionResult(runs=runs, wins=wins, averages=averages)
