"""Confusion matrices, detection metrics and k-fold cross-validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .data import N_CLASSES, ClassLabel
from .errors import BadKError, EmptyError, LengthMismatchError, StageError

AVERAGING = ("weighted", "binary")


@dataclass
class ConfusionMatrix:
    """Rows are true classes, columns predicted classes."""

    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    def one_vs_rest(self, c: int) -> tuple[int, int, int, int]:
        """``(TP, TN, FP, FN)`` treating class ``c`` as the positive class."""
        m = self.counts
        tp = int(m[c, c])
        fn = int(m[c, :].sum()) - tp
        fp = int(m[:, c].sum()) - tp
        tn = self.total - tp - fn - fp
        return tp, tn, fp, fn

    def binary_attack(self) -> "ConfusionMatrix":
        """Collapse to 2x2 with Normal (class 0) vs every attack class."""
        m = self.counts
        return ConfusionMatrix(np.array([
            [m[0, 0], m[0, 1:].sum()],
            [m[1:, 0].sum(), m[1:, 1:].sum()],
        ], dtype=np.int64))


def confusion(preds, truths, n_classes: int = N_CLASSES) -> ConfusionMatrix:
    p = np.asarray([int(v) for v in preds], dtype=np.int64)
    t = np.asarray([int(v) for v in truths], dtype=np.int64)
    if p.shape != t.shape:
        raise LengthMismatchError(f"{p.size} predictions vs {t.size} truths")
    if p.size == 0:
        raise EmptyError("confusion matrix of zero records")
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (t, p), 1)
    return ConfusionMatrix(counts)


@dataclass
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f_score: float
    tpr: float
    fpr: float
    degenerate: list[str] = field(default_factory=list)

    def as_dict(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in ("accuracy", "precision", "recall", "f_score", "tpr", "fpr")}


def _ratio(num: float, den: float, name: str, flags: list[str]) -> float:
    if den == 0:
        flags.append(name)
        return 0.0
    return num / den


def f_score(precision: float, recall: float, literal: bool = False) -> float:
    """Harmonic combination ``2PR / (P + R)``; ``literal`` drops the factor 2."""
    if precision + recall == 0:
        return 0.0
    factor = 1.0 if literal else 2.0
    return factor * precision * recall / (precision + recall)


def binary_metrics(tp: int, tn: int, fp: int, fn: int, literal_f: bool = False) -> Metrics:
    flags: list[str] = []
    total = tp + tn + fp + fn
    if total == 0:
        raise EmptyError("no records")
    accuracy = (tp + tn) / total
    precision = _ratio(tp, tp + fp, "precision", flags)
    recall = _ratio(tp, tp + fn, "recall", flags)
    fpr = _ratio(fp, tn + fp, "fpr", flags)
    return Metrics(accuracy, precision, recall, f_score(precision, recall, literal_f), recall, fpr, flags)


def metrics(cm: ConfusionMatrix, averaging: str = "weighted", literal_f: bool = False) -> Metrics:
    """Detection metrics from a confusion matrix.

    ``binary``: collapse to Normal vs Attack (attack positive) and apply the
    two-class formulas. ``weighted``: accuracy is the multi-class hit rate
    (trace / total); precision, recall, F and FPR are one-vs-rest per class
    averaged with class-support weights. Zero denominators give 0 and are
    named in ``degenerate``.
    """
    if cm.total == 0:
        raise EmptyError("confusion matrix is empty")
    if averaging == "binary":
        b = cm.binary_attack().counts
        return binary_metrics(int(b[1, 1]), int(b[0, 0]), int(b[0, 1]), int(b[1, 0]), literal_f)
    if averaging != "weighted":
        raise ValueError(f"averaging must be one of {AVERAGING}")
    support = cm.counts.sum(axis=1)
    weights = support / support.sum()
    per = [binary_metrics(*cm.one_vs_rest(c), literal_f=literal_f) for c in range(cm.n_classes)]
    flags = sorted({f"{name}[{c}]" for c, m in enumerate(per) if support[c] > 0 for name in m.degenerate})
    avg = {k: float(sum(w * getattr(m, k) for w, m in zip(weights, per)))
           for k in ("precision", "recall", "f_score", "fpr")}
    accuracy = float(np.trace(cm.counts) / cm.total)
    return Metrics(accuracy, avg["precision"], avg["recall"], avg["f_score"], avg["recall"], avg["fpr"], flags)


@dataclass
class FoldPlan:
    folds: list[np.ndarray]

    @property
    def k(self) -> int:
        return len(self.folds)

    def split(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """``(train_indices, validation_indices)`` for round ``i``."""
        train = np.concatenate([f for j, f in enumerate(self.folds) if j != i])
        return train, self.folds[i]


def kfold_split(n: int, k: int, seed: int) -> FoldPlan:
    """Seeded shuffle, then ``k`` contiguous slices; the first ``n % k`` get one extra."""
    if k < 2 or n < k:
        raise BadKError(f"need 2 <= k <= n, got k={k}, n={n}")
    order = np.random.default_rng(seed).permutation(n)
    return FoldPlan(np.array_split(order, k))


@dataclass
class CVResult:
    per_fold: list[float]

    @property
    def mean(self) -> float:
        return float(np.mean(self.per_fold))


Trainer = Callable[[np.ndarray, np.ndarray, int], Callable[[np.ndarray], np.ndarray]]


def cross_validate(trainer: Trainer, x, y, k: int = 10, seed: int = 0) -> CVResult:
    """Fit from scratch on k-1 folds, score accuracy on the held-out fold.

    ``trainer(x_train, y_train, fold_index)`` returns a predictor mapping a
    feature matrix to class indices.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape[0] != y.shape[0]:
        raise LengthMismatchError("x and y differ in length")
    plan = kfold_split(x.shape[0], k, seed)
    scores = []
    for i in range(plan.k):
        tr, va = plan.split(i)
        try:
            predictor = trainer(x[tr], y[tr], i)
            pred = np.asarray(predictor(x[va]))
        except Exception as exc:
            raise StageError(f"fold {i}", exc) from exc
        scores.append(float(np.mean(pred == y[va])))
    return CVResult(scores)


def format_report(m: Metrics, title: str = "") -> str:
    """Plain-text table with the usual IDS columns, values in percent."""
    cols = ("Accuracy", "Precision", "Recall", "f-score", "FPR", "TPR")
    vals = (m.accuracy, m.precision, m.recall, m.f_score, m.fpr, m.tpr)
    head = " | ".join(f"{c:>9}" for c in cols)
    row = " | ".join(f"{100 * v:9.4f}" for v in vals)
    lines = [title] if title else []
    lines += [head, "-" * len(head), row]
    return "\n".join(lines)


def class_names() -> list[str]:
    return [c.display for c in ClassLabel]
