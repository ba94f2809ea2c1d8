"""Per-class accuracy, confusion matrix and CSV reports."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .hmm import N_CLASSES


@dataclass(frozen=True, eq=False)
class EvaluationReport:
    confusion: np.ndarray  # [true, predicted] counts
    rejects: np.ndarray  # per true class

    @classmethod
    def from_predictions(cls, truth: Sequence[int], predicted: Sequence[Optional[int]]) -> "EvaluationReport":
        """Tally predictions in sample order; ``None`` is a reject."""
        confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
        rejects = np.zeros(N_CLASSES, dtype=np.int64)
        for t, p in zip(truth, predicted):
            if p is None:
                rejects[t] += 1
            else:
                confusion[t, p] += 1
        return cls(confusion, rejects)

    @property
    def tested(self) -> np.ndarray:
        return self.confusion.sum(axis=1) + self.rejects

    @property
    def correct(self) -> np.ndarray:
        return np.diag(self.confusion).copy()

    @property
    def total(self) -> int:
        return int(self.tested.sum())

    @property
    def per_class_accuracy(self) -> np.ndarray:
        tested = self.tested
        return np.where(tested > 0, self.correct / np.maximum(tested, 1), 0.0)

    @property
    def overall_accuracy(self) -> float:
        return float(np.trace(self.confusion) / self.total) if self.total else 0.0

    def check(self) -> None:
        """Raise ``AssertionError`` if the counts are internally inconsistent."""
        assert np.all(self.confusion >= 0) and np.all(self.rejects >= 0)
        assert np.array_equal(self.confusion.sum(axis=1) + self.rejects, self.tested)
        assert self.total == int(self.confusion.sum() + self.rejects.sum())
        acc = self.per_class_accuracy
        assert np.all((acc >= 0) & (acc <= 1))

    def per_class_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["digit", "tested", "correct", "rejected", "accuracy"])
        for d in range(N_CLASSES):
            w.writerow([d, int(self.tested[d]), int(self.correct[d]), int(self.rejects[d]),
                        f"{self.per_class_accuracy[d]:.6f}"])
        return buf.getvalue()

    def confusion_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["true\\predicted"] + [str(d) for d in range(N_CLASSES)])
        for d in range(N_CLASSES):
            w.writerow([d] + [int(v) for v in self.confusion[d]])
        return buf.getvalue()

    def summary(self) -> str:
        acc = self.per_class_accuracy
        lines = [f"overall_accuracy={self.overall_accuracy:.6f}"]
        lines += [f"accuracy[{d}]={acc[d]:.6f}" for d in range(N_CLASSES)]
        lines.append(f"most_accurate={int(np.argmax(acc))} least_accurate={int(np.argmin(acc))}")
        return "\n".join(lines)
