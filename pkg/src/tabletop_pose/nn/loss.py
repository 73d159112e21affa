"""Softmax with categorical cross-entropy."""

from __future__ import annotations

import numpy as np

from tabletop_pose.errors import DimensionError
from tabletop_pose.tensor import Tensor, ensure_finite


def softmax(logits: Tensor) -> Tensor:
    """Softmax over the last axis with max-subtraction."""
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def _log_softmax(logits: Tensor) -> Tensor:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def _check_labels(labels: np.ndarray, k: int) -> None:
    if k < 2:
        raise DimensionError(f"softmax needs at least 2 classes, got {k}")
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise DimensionError(f"label out of range for {k} classes: {labels.tolist()}")


def softmax_xent(logits: Tensor, label: int) -> tuple[float, Tensor, Tensor]:
    """Loss, probabilities and logit gradient for a single sample.

    loss = -ln softmax(logits)[label]; dlogits = probs - onehot(label).
    Non-finite logits raise NumericError.
    """
    if logits.ndim != 1:
        raise DimensionError(f"softmax_xent expects [k] logits, got {list(logits.shape)}")
    _check_labels(np.asarray([label]), logits.shape[0])
    ensure_finite(logits, "logits")
    log_probs = _log_softmax(logits)
    probs = np.exp(log_probs)
    dlogits = probs.copy()
    dlogits[label] -= 1
    return float(-log_probs[label]), probs, dlogits


def softmax_xent_batch(logits: Tensor, labels: np.ndarray) -> tuple[float, Tensor, Tensor]:
    """Mean loss over a batch, per-sample probabilities and the mean-loss gradient."""
    if logits.ndim != 2 or labels.shape != (logits.shape[0],):
        raise DimensionError(
            f"softmax_xent_batch expects [n,k] logits and [n] labels, got "
            f"{list(logits.shape)} and {list(labels.shape)}"
        )
    _check_labels(labels, logits.shape[1])
    ensure_finite(logits, "logits")
    n = logits.shape[0]
    rows = np.arange(n)
    log_probs = _log_softmax(logits)
    probs = np.exp(log_probs)
    dlogits = probs.copy()
    dlogits[rows, labels] -= 1
    dlogits /= n
    return float(-log_probs[rows, labels].mean()), probs, dlogits
