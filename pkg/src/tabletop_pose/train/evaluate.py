"""Accuracy and confusion matrices."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

import numpy as np

from tabletop_pose.errors import DimensionError
from tabletop_pose.nn.network import Network
from tabletop_pose.train.checkpoint import Checkpoint
from tabletop_pose.train.data import LabeledData
from tabletop_pose.types import Mode

EVAL_BATCH = 64


def confusion_matrix(labels: np.ndarray, predictions: np.ndarray, num_classes: int) -> np.ndarray:
    """`[k,k]` counts; row = true class, column = predicted class."""
    matrix = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(matrix, (labels, predictions), 1)
    return matrix


def predict_classes(network: Network, images: np.ndarray, batch_size: int = EVAL_BATCH) -> np.ndarray:
    """Arg-max class per image, EVAL mode (dropout off)."""
    predictions = [
        np.argmax(network.forward(images[start : start + batch_size], Mode.EVAL), axis=1)
        for start in range(0, len(images), batch_size)
    ]
    return np.concatenate(predictions).astype(np.int64)


@dataclass
class EvaluationReport:
    """Accuracy over a labeled set plus its confusion matrix.

    `accuracy` always equals the confusion trace divided by its total.
    """

    accuracy: float
    confusion: np.ndarray
    label_names: tuple[str, ...]

    @property
    def total(self) -> int:
        return int(self.confusion.sum())

    @property
    def correct(self) -> int:
        return int(np.trace(self.confusion))

    def per_class_accuracy(self) -> dict[str, float | None]:
        """Recall per class; None for classes with no samples."""
        counts = self.confusion.sum(axis=1)
        return {
            name: (float(self.confusion[i, i] / counts[i]) if counts[i] else None)
            for i, name in enumerate(self.label_names)
        }

    def to_dict(self) -> dict[str, Any]:
        return {
            "accuracy": self.accuracy,
            "total": self.total,
            "correct": self.correct,
            "labels": list(self.label_names),
            "confusion": self.confusion.tolist(),
            "per_class_accuracy": self.per_class_accuracy(),
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def format_confusion(self) -> str:
        """Plain-text confusion matrix with row and column labels."""
        width = max(5, *(len(n) for n in self.label_names), len(str(self.confusion.max())))
        lines = [" " * width + " " + " ".join(n.rjust(width) for n in self.label_names)]
        for name, row in zip(self.label_names, self.confusion):
            lines.append(name.rjust(width) + " " + " ".join(str(v).rjust(width) for v in row))
        return "\n".join(lines)


def report_from_predictions(
    labels: np.ndarray, predictions: np.ndarray, label_names: tuple[str, ...]
) -> EvaluationReport:
    confusion = confusion_matrix(labels, predictions, len(label_names))
    total = confusion.sum()
    accuracy = float(np.trace(confusion) / total) if total else 0.0
    return EvaluationReport(accuracy=accuracy, confusion=confusion, label_names=label_names)


def evaluate_network(network: Network, data: LabeledData) -> EvaluationReport:
    if data.sample_shape != tuple(network.input_shape):
        raise DimensionError(
            f"{network.spec.name} expects input {list(network.input_shape)}, "
            f"data has {list(data.sample_shape)}"
        )
    if len(data.label_names) != network.spec.num_classes:
        raise DimensionError(
            f"{network.spec.name} has {network.spec.num_classes} outputs, data has "
            f"{len(data.label_names)} classes"
        )
    predictions = predict_classes(network, data.images)
    return report_from_predictions(data.labels, predictions, data.label_names)


def evaluate(checkpoint: Checkpoint, data: LabeledData) -> EvaluationReport:
    """Accuracy and confusion matrix of a checkpoint on labeled data.

    Raises:
        DimensionError: If the checkpoint input shape or class count does not
            match the data.
    """
    return evaluate_network(checkpoint.to_network(), data)
