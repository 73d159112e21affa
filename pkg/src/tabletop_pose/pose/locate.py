"""Two-stage inference: recognize the object, read its angle with that object's model, plan the move home."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from tabletop_pose.errors import ConfigError
from tabletop_pose.models.architectures import model_for
from tabletop_pose.pose.home import HomePoseTable, home_transform
from tabletop_pose.pose.transform import PoseTransform, centroid
from tabletop_pose.train.checkpoint import Checkpoint, load_checkpoint
from tabletop_pose.types import ANGLE_LABELS, ObjectKind, Task

logger = logging.getLogger(__name__)


def angle_checkpoint_name(obj: ObjectKind) -> str:
    """File name the per-object angle model is looked up under."""
    return f"angle-{obj.value}.ckpt"


@dataclass(frozen=True)
class Location:
    """What the pipeline found in one image and the transform that puts it home."""

    object: ObjectKind
    object_probability: float
    angle_class: int
    angle_probability: float
    centroid: tuple[float, float]
    transform: PoseTransform

    @property
    def angle_label(self) -> str:
        return ANGLE_LABELS[self.angle_class]

    def to_dict(self) -> dict[str, Any]:
        return {
            "object": self.object.value,
            "object_probability": self.object_probability,
            "angle": self.angle_label,
            "angle_probability": self.angle_probability,
            "centroid": list(self.centroid),
            "transform": self.transform.matrix.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def check_angle_model(checkpoint: Checkpoint, obj: ObjectKind) -> None:
    """Require `checkpoint` to be the angle model `model_for(obj)` builds.

    Raises:
        ConfigError: If it was trained for another task or object, or its
            layers differ from the per-object angle architecture.
    """
    meta = checkpoint.metadata
    name = checkpoint.architecture.name
    if meta.task is not Task.ANGLE:
        raise ConfigError(f"{name}: a {meta.task.value} model cannot classify {obj.value} angles")
    if meta.object is not obj:
        found = meta.object.value if meta.object else "no object"
        raise ConfigError(f"{name}: trained for {found}, needed {obj.value}")
    _, h, w = checkpoint.architecture.input_shape
    expected = model_for(obj, h, w)
    if checkpoint.architecture.structure() != expected.structure():
        raise ConfigError(f"{name}: layers differ from the {expected.name} architecture")


def load_angle_models(directory: str | Path) -> dict[ObjectKind, Checkpoint]:
    """Every `angle-<object>.ckpt` found in `directory`, checked against its object.

    Objects without a file are left out; `locate` reports them only when they
    are recognized.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise ConfigError(f"angle model directory {directory} not found")
    models: dict[ObjectKind, Checkpoint] = {}
    for obj in ObjectKind:
        path = directory / angle_checkpoint_name(obj)
        if not path.is_file():
            continue
        checkpoint = load_checkpoint(path)
        check_angle_model(checkpoint, obj)
        models[obj] = checkpoint
    logger.debug(f"angle models in {directory}: {', '.join(o.value for o in models) or 'none'}")
    return models


def _classify(checkpoint: Checkpoint, image: np.ndarray) -> tuple[int, float]:
    probs = checkpoint.to_network().predict_proba(checkpoint.prepare_input(image))
    best = int(np.argmax(probs))
    return best, float(probs[best])


def locate(
    image: np.ndarray,
    recognizer: Checkpoint,
    angle_models: Mapping[ObjectKind, Checkpoint],
    table: HomePoseTable,
    *,
    mask: np.ndarray | None = None,
) -> Location:
    """Recognize the object in a `[1,h,w]` [0,1] image, classify its angle, and plan its move home.

    The recognizer picks the object; that object's angle model picks the
    angle class. The centroid comes from `mask` when given, otherwise from the
    image itself (masked images have a black background).

    Raises:
        ConfigError: If `recognizer` is not a recognition model, or the
            recognized object has no angle model.
        DimensionError: If the image does not fit either model's input.
        NoObjectError: If the centroid source is entirely black.
    """
    if recognizer.metadata.task is not Task.RECOGNITION:
        raise ConfigError(f"{recognizer.architecture.name} is not a recognition model")
    object_index, object_probability = _classify(recognizer, image)
    labels = recognizer.metadata.labels or [o.value for o in ObjectKind]
    obj = ObjectKind(labels[object_index])

    if obj not in angle_models:
        raise ConfigError(f"recognized {obj.value} but there is no {angle_checkpoint_name(obj)}")
    angle_class, angle_probability = _classify(angle_models[obj], image)

    point = centroid(mask if mask is not None else image)
    return Location(
        object=obj,
        object_probability=object_probability,
        angle_class=angle_class,
        angle_probability=angle_probability,
        centroid=point,
        transform=home_transform(obj, angle_class, point, table),
    )
