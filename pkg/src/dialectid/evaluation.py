"""Stratified splitting, k-fold partitioning, and confusion-matrix metrics."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import ClassTooSmall, EmptyMatrix, LengthMismatch
from .features import DIALECTS, Dataset
from .rng import stream

_TAG_SPLIT = 21
_TAG_FOLD = 22

DEFAULT_SPLIT_SEED = 42
DEFAULT_TEST_FRACTION = 0.2


@dataclass(frozen=True)
class SplitResult:
    train_indices: tuple[int, ...]
    test_indices: tuple[int, ...]


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray
    class_names: tuple[str, ...] = DIALECTS

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        k = len(self.class_names)
        if counts.shape != (k, k):
            raise ValueError(f"counts must be {k}x{k}")
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")


def _canonical_class_order(data: Dataset, class_index: int) -> list[int]:
    """Row indices of one class, sorted by (speaker_id, original position).

    The canonical key makes the seeded shuffle independent of incidental
    row order for distinctly-named speakers.
    """
    rows = [i for i, row in enumerate(data.rows)
            if data.class_names.index(row.label) == class_index]
    rows.sort(key=lambda i: (data.rows[i].speaker_id, i))
    return rows


def stratified_split(data: Dataset, test_fraction: float, seed: int) -> SplitResult:
    """Per-class seeded shuffle; round-half-up of test_fraction (min 1) to test."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    y = data.labels()
    train: list[int] = []
    test: list[int] = []
    for c in range(len(data.class_names)):
        n_class = int(np.sum(y == c))
        if n_class == 0:
            continue
        if n_class < 2:
            raise ClassTooSmall(
                f"class {data.class_names[c]} has {n_class} row(s), need >= 2")
        rows = _canonical_class_order(data, c)
        stream(seed, _TAG_SPLIT, c).shuffle(rows)
        n_test = max(1, int(math.floor(test_fraction * n_class + 0.5)))
        n_test = min(n_test, n_class - 1)
        test.extend(rows[:n_test])
        train.extend(rows[n_test:])
    return SplitResult(tuple(sorted(train)), tuple(sorted(test)))


def stratified_k_fold(data: Dataset, k: int, seed: int) -> list[tuple[int, ...]]:
    """k disjoint folds covering all rows; per-class sizes differ by <= 1."""
    if k < 2:
        raise ValueError("need k >= 2")
    y = data.labels()
    folds: list[list[int]] = [[] for _ in range(k)]
    for c in range(len(data.class_names)):
        n_class = int(np.sum(y == c))
        if n_class == 0:
            continue
        if n_class < k:
            raise ClassTooSmall(
                f"class {data.class_names[c]} has {n_class} row(s), need >= {k}")
        rows = _canonical_class_order(data, c)
        stream(seed, _TAG_FOLD, c).shuffle(rows)
        for j in range(k):
            folds[j].extend(rows[j::k])
    return [tuple(sorted(f)) for f in folds]


def confusion_matrix(true_labels, predicted_labels,
                     class_names: tuple[str, ...] = DIALECTS) -> ConfusionMatrix:
    """counts[i][j] = number of rows with true class i predicted as class j."""
    true_arr = np.asarray(true_labels, dtype=np.int64)
    pred_arr = np.asarray(predicted_labels, dtype=np.int64)
    if true_arr.shape != pred_arr.shape:
        raise LengthMismatch(
            f"{len(true_arr)} true labels vs {len(pred_arr)} predictions")
    k = len(class_names)
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (true_arr, pred_arr), 1)
    return ConfusionMatrix(counts, class_names)


def normalize_rows(matrix: ConfusionMatrix) -> np.ndarray:
    """Row-wise division by row sums; all-zero rows stay zero.

    The diagonal of the result is the per-true-class recall.
    """
    counts = matrix.counts.astype(np.float64)
    sums = counts.sum(axis=1, keepdims=True)
    return np.divide(counts, sums, out=np.zeros_like(counts), where=sums > 0)


def accuracy(matrix: ConfusionMatrix) -> float:
    total = int(matrix.counts.sum())
    if total == 0:
        raise EmptyMatrix("no evaluated rows")
    return float(np.trace(matrix.counts)) / total


def format_report(matrix: ConfusionMatrix) -> str:
    """Accuracy, raw and normalized matrices, per-class recall as a text block."""
    names = matrix.class_names
    width = max(len(n) for n in names) + 2
    lines = [f"accuracy: {accuracy(matrix):.4f}", "", "confusion matrix (counts):"]
    header = " " * width + "".join(f"{n:>{width}}" for n in names)
    lines.append(header)
    for i, name in enumerate(names):
        lines.append(f"{name:>{width}}" + "".join(
            f"{int(v):>{width}}" for v in matrix.counts[i]))
    lines.append("")
    lines.append("normalized (rows sum to 1):")
    norm = normalize_rows(matrix)
    lines.append(header)
    for i, name in enumerate(names):
        lines.append(f"{name:>{width}}" + "".join(f"{v:>{width}.4f}" for v in norm[i]))
    lines.append("")
    lines.append("per-class recall:")
    for i, name in enumerate(names):
        row_total = matrix.counts[i].sum()
        recall = matrix.counts[i, i] / row_total if row_total else 0.0
        lines.append(f"  {name}: {recall:.4f}")
    return "\n".join(lines) + "\n"


def confusion_csv(matrix: ConfusionMatrix) -> bytes:
    """Counts as CSV with header true_class,pred_<name>,..."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["true_class"] + [f"pred_{n}" for n in matrix.class_names])
    for i, name in enumerate(matrix.class_names):
        writer.writerow([name] + [int(v) for v in matrix.counts[i]])
    return buf.getvalue().encode("utf-8")
