"""A labeled grayscale image."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from tabletop_pose.errors import DimensionError, ParseError
from tabletop_pose.types import ANGLE_LABELS, Height, ObjectKind, Source, Task


@dataclass
class Sample:
    """One image with its labels.

    `image` is `[1,h,w]` in [0,1]. `angle_class` is 0..7 for A1..A8. Originals
    and synthetic renders carry shift (0,0); augmented copies carry their
    nonzero offset. `path` is the manifest-relative file path when the sample
    lives in an archive.
    """

    image: np.ndarray
    object: ObjectKind
    instance: int
    height: Height
    angle_class: int
    shift: tuple[int, int] = (0, 0)
    source: Source = Source.ORIGINAL
    path: str | None = None
    group: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.image.ndim != 3 or self.image.shape[0] != 1:
            raise DimensionError(f"sample image must be [1,h,w], got {list(self.image.shape)}")
        if not 1 <= self.instance <= 99:
            raise ParseError(f"instance out of range: {self.instance}")
        if not 0 <= self.angle_class < len(ANGLE_LABELS):
            raise ParseError(f"angle_class out of range: {self.angle_class}")
        if self.source is Source.AUGMENTED and self.shift == (0, 0):
            raise ParseError("augmented samples need a nonzero shift")
        if self.source is not Source.AUGMENTED and self.shift != (0, 0):
            raise ParseError(f"{self.source.value} samples carry shift (0,0), got {self.shift}")

    @property
    def angle_label(self) -> str:
        return ANGLE_LABELS[self.angle_class]

    def label(self, task: Task) -> int:
        """Class index for `task`: object index or angle class."""
        return self.object.index if task is Task.RECOGNITION else self.angle_class
