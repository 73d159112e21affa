"""Stacked image/label arrays fed to the training loop."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from tabletop_pose.dataset.image import resize_half
from tabletop_pose.dataset.sample import Sample
from tabletop_pose.errors import ConfigError, DimensionError
from tabletop_pose.types import ANGLE_LABELS, OBJECT_LABELS, Task


def label_names(task: Task) -> tuple[str, ...]:
    return OBJECT_LABELS if task is Task.RECOGNITION else ANGLE_LABELS


@dataclass
class LabeledData:
    """`images` is `[n,1,h,w]` float32 in [0,1]; `labels` is `[n]` int64."""

    images: np.ndarray
    labels: np.ndarray
    label_names: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.images.ndim != 4 or self.images.shape[1] != 1:
            raise DimensionError(f"images must be [n,1,h,w], got {list(self.images.shape)}")
        if self.labels.shape != (self.images.shape[0],):
            raise DimensionError(
                f"{self.images.shape[0]} images but labels of shape {list(self.labels.shape)}"
            )
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= len(self.label_names)):
            raise DimensionError(f"labels must be in 0..{len(self.label_names) - 1}")

    @classmethod
    def from_samples(
        cls,
        samples: Sequence[Sample],
        task: Task,
        *,
        halve_input: bool = False,
    ) -> LabeledData:
        """Stack samples for `task`, optionally halving every image first.

        Raises:
            ConfigError: If there are no samples.
            DimensionError: If image shapes differ.
        """
        if not samples:
            raise ConfigError("no samples to stack")
        images = [resize_half(s.image) if halve_input else s.image for s in samples]
        shapes = {img.shape for img in images}
        if len(shapes) != 1:
            raise DimensionError(f"samples have mixed image shapes: {sorted(shapes)}")
        return cls(
            images=np.stack(images).astype(np.float32, copy=False),
            labels=np.array([s.label(task) for s in samples], dtype=np.int64),
            label_names=label_names(task),
        )

    @property
    def sample_shape(self) -> tuple[int, int, int]:
        return tuple(self.images.shape[1:])  # type: ignore[return-value]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=len(self.label_names))

    def __len__(self) -> int:
        return len(self.labels)
