"""Planar (SE(2)) transforms that carry an object to its home pose.

Conventions: angles are in degrees, counterclockwise positive, with angle
class A_k at (k-1)*45 degrees. Points are (x, y) in whatever table units the
home table uses; for image pixels x grows rightward and y downward, so
"counterclockwise" there is as seen with the y axis flipped.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from tabletop_pose.errors import ConfigError, NoObjectError
from tabletop_pose.types import NUM_ANGLE_CLASSES

ANGLE_STEP_DEG = 360.0 / NUM_ANGLE_CLASSES


def angle_of(angle_class: int) -> float:
    """Degrees of an angle class: class k (A_{k+1}) is k*45."""
    if not 0 <= angle_class < NUM_ANGLE_CLASSES:
        raise ConfigError(f"angle class must be in 0..{NUM_ANGLE_CLASSES - 1}, got {angle_class}")
    return angle_class * ANGLE_STEP_DEG


def normalize_degrees(degrees: float) -> float:
    """Equivalent angle in (-180, 180]."""
    wrapped = math.fmod(degrees, 360.0)
    if wrapped > 180.0:
        wrapped -= 360.0
    elif wrapped <= -180.0:
        wrapped += 360.0
    return wrapped


def _cos_sin(degrees: float) -> tuple[float, float]:
    """cos and sin, exact at multiples of 90 degrees."""
    if degrees % 90 == 0:
        return [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][int(degrees // 90) % 4]
    radians = math.radians(degrees)
    return math.cos(radians), math.sin(radians)


def centroid(image: np.ndarray) -> tuple[float, float]:
    """Intensity-weighted mean (x, y) of a `[h,w]` or `[1,h,w]` mask or image.

    Raises:
        NoObjectError: If every pixel is zero.
    """
    pixels = np.asarray(image, dtype=np.float64)
    if pixels.ndim == 3 and pixels.shape[0] == 1:
        pixels = pixels[0]
    if pixels.ndim != 2:
        raise ValueError(f"centroid needs [h,w] or [1,h,w], got {list(pixels.shape)}")
    total = pixels.sum()
    if total <= 0.0:
        raise NoObjectError("no object: image has no nonzero pixels")
    rows, cols = np.indices(pixels.shape)
    return float((cols * pixels).sum() / total), float((rows * pixels).sum() / total)


@dataclass(frozen=True)
class PoseTransform:
    """3x3 homogeneous matrix [[cos, -sin, tx], [sin, cos, ty], [0, 0, 1]].

    Example:
        t = PoseTransform.rotation_about((10.0, 5.0), -90.0)
        t.apply((10.0, 5.0))  # (10.0, 5.0)
    """

    matrix: np.ndarray

    def __post_init__(self) -> None:
        if self.matrix.shape != (3, 3):
            raise ValueError(f"pose transform must be 3x3, got {list(self.matrix.shape)}")
        if not np.array_equal(self.matrix[2], [0.0, 0.0, 1.0]):
            raise ValueError(f"bottom row must be [0, 0, 1], got {self.matrix[2].tolist()}")

    @classmethod
    def identity(cls) -> PoseTransform:
        return cls(np.eye(3))

    @classmethod
    def from_rotation(cls, degrees: float, translation: tuple[float, float] = (0.0, 0.0)) -> PoseTransform:
        c, s = _cos_sin(degrees)
        tx, ty = translation
        return cls(np.array([[c, 0.0 - s, tx], [s, c, ty], [0.0, 0.0, 1.0]]))

    @classmethod
    def rotation_about(
        cls,
        point: tuple[float, float],
        degrees: float,
        target: tuple[float, float] | None = None,
    ) -> PoseTransform:
        """Rotate about `point`, then move `point` to `target` (default: stay put)."""
        c, s = _cos_sin(degrees)
        px, py = point
        qx, qy = target if target is not None else point
        return cls.from_rotation(degrees, (qx - (c * px - s * py), qy - (s * px + c * py)))

    @property
    def rotation(self) -> np.ndarray:
        return self.matrix[:2, :2]

    @property
    def translation(self) -> tuple[float, float]:
        return float(self.matrix[0, 2]), float(self.matrix[1, 2])

    @property
    def degrees(self) -> float:
        return math.degrees(math.atan2(self.matrix[1, 0], self.matrix[0, 0]))

    def apply(self, point: tuple[float, float]) -> tuple[float, float]:
        x, y, _ = self.matrix @ np.array([point[0], point[1], 1.0])
        return float(x), float(y)

    def compose(self, first: PoseTransform) -> PoseTransform:
        """`self` after `first`."""
        return PoseTransform(self.matrix @ first.matrix)

    def inverse(self) -> PoseTransform:
        r = self.rotation.T
        t = -r @ self.matrix[:2, 2]
        out = np.eye(3)
        out[:2, :2] = r
        out[:2, 2] = t
        return PoseTransform(out)

    def is_rigid(self, tol: float = 1e-12) -> bool:
        """R^T R = I and det R = +1 within `tol`."""
        r = self.rotation
        return bool(np.allclose(r.T @ r, np.eye(2), rtol=0.0, atol=tol) and abs(np.linalg.det(r) - 1.0) <= tol)

    def to_rows(self) -> list[float]:
        """The nine entries, row-major."""
        return [float(v) for v in self.matrix.ravel()]

    def to_json(self) -> str:
        return json.dumps(self.matrix.tolist())

    def format_rows(self) -> str:
        return " ".join(repr(v) for v in self.to_rows())


def pose_transform(
    current_deg: float,
    current_xy: tuple[float, float],
    home_deg: float,
    home_xy: tuple[float, float],
) -> PoseTransform:
    """Rotate by the normalized angle difference about the current position, then translate it home."""
    delta = normalize_degrees(home_deg - current_deg)
    return PoseTransform.rotation_about(current_xy, delta, home_xy)
