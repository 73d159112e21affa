"""Core type definitions for tabletop-pose.

Enums shared across the dataset, network and pose code. String-valued so they
serialize verbatim into manifests, checkpoint headers and JSON documents.
"""

from __future__ import annotations

from enum import Enum

import numpy as np


class ObjectKind(str, Enum):
    """The three tabletop object categories."""

    MUG = "mug"
    MOUSE = "mouse"
    STAPLER = "stapler"

    @property
    def index(self) -> int:
        """Class index used by the recognition network."""
        return list(ObjectKind).index(self)


class Height(str, Enum):
    """Camera heights. H1 trains, H2 tests."""

    H1 = "H1"
    H2 = "H2"


class Split(str, Enum):
    """Manifest split assignment."""

    TRAIN = "train"
    VAL = "val"
    TEST = "test"


class Source(str, Enum):
    """Where a sample came from."""

    ORIGINAL = "original"
    AUGMENTED = "augmented"
    SYNTHETIC = "synthetic"


class Mode(str, Enum):
    """Forward-pass mode."""

    TRAIN = "train"  # caches activations, dropout active
    EVAL = "eval"  # pure, no cache


class Precision(str, Enum):
    """Working precision of a network."""

    F32 = "f32"
    F64 = "f64"  # gradient checks only

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(np.float32 if self is Precision.F32 else np.float64)


class LayerKind(str, Enum):
    """Layer kinds understood by the network builder."""

    CONV2D = "conv2d"
    MAXPOOL2 = "maxpool2"
    DENSE = "dense"
    RELU = "relu"
    DROPOUT = "dropout"
    FLATTEN = "flatten"


class Task(str, Enum):
    """What a network predicts."""

    RECOGNITION = "recognition"
    ANGLE = "angle"


NUM_ANGLE_CLASSES = 8
ANGLE_LABELS = tuple(f"A{k}" for k in range(1, NUM_ANGLE_CLASSES + 1))
OBJECT_LABELS = tuple(o.value for o in ObjectKind)
