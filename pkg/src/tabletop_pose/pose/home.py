"""Home poses and the transform that reaches them."""

from __future__ import annotations

from pathlib import Path

from pydantic import BaseModel, RootModel, ValidationError, field_validator, model_validator

from tabletop_pose.errors import ConfigError
from tabletop_pose.pose.transform import PoseTransform, angle_of, pose_transform
from tabletop_pose.types import ANGLE_LABELS, ObjectKind


class HomePose(BaseModel):
    """Target position (table units) and angle label of one object."""

    x: float
    y: float
    home_angle: str

    model_config = {"extra": "forbid"}

    @field_validator("home_angle")
    @classmethod
    def validate_home_angle(cls, v: str) -> str:
        if v not in ANGLE_LABELS:
            raise ValueError(f"home_angle must be one of A1..A8, got {v!r}")
        return v

    @property
    def angle_class(self) -> int:
        return ANGLE_LABELS.index(self.home_angle)

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


class HomePoseTable(RootModel[dict[ObjectKind, HomePose]]):
    """One home pose per known object, read from
    `{"mug": {"x": ..., "y": ..., "home_angle": "A1"}, ...}`.
    """

    @model_validator(mode="after")
    def _check_every_object(self) -> HomePoseTable:
        missing = [o.value for o in ObjectKind if o not in self.root]
        if missing:
            raise ValueError(f"home table is missing {', '.join(missing)}")
        return self

    def __getitem__(self, obj: ObjectKind | str) -> HomePose:
        try:
            return self.root[ObjectKind(obj)]
        except ValueError:
            known = ", ".join(o.value for o in ObjectKind)
            raise ConfigError(f"unknown object {obj!r} (expected one of: {known})") from None


def load_home_table(path: str | Path) -> HomePoseTable:
    """Parse a home table JSON file.

    Raises:
        ConfigError: If the file is missing or invalid.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"home table {path} not found")
    try:
        return HomePoseTable.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise ConfigError(f"{path}: invalid home table: {e}") from e


def home_transform(
    obj: ObjectKind | str,
    predicted_class: int,
    current_centroid: tuple[float, float],
    table: HomePoseTable,
) -> PoseTransform:
    """Transform moving an object seen at `predicted_class` and `current_centroid` home.

    It rotates by the home angle minus the predicted angle, normalized to
    (-180, 180], about the current centroid, then translates that centroid
    onto the home position. Applying it to the centroid gives the home
    position.

    Raises:
        ConfigError: For an unknown object or an angle class outside 0..7.
    """
    home = table[obj]
    return pose_transform(
        angle_of(predicted_class),
        current_centroid,
        angle_of(home.angle_class),
        home.position,
    )
