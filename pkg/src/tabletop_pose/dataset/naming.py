"""Image file naming: `<object>_<instance>_<H1|H2>_<A1..A8>_<index>.pgm`."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import PurePath

from tabletop_pose.errors import ParseError
from tabletop_pose.types import ANGLE_LABELS, Height, ObjectKind

IMAGE_SUFFIX = ".pgm"
MASK_SUFFIX = "_mask"


@dataclass(frozen=True)
class ImageName:
    object: ObjectKind
    instance: int
    height: Height
    angle_class: int
    index: int


def _field_error(name: str, component: str, value: str, expected: str) -> ParseError:
    return ParseError(f"{name!r}: bad {component} field {value!r} (expected {expected})")


def parse_filename(name: str) -> ImageName:
    """Labels encoded in an image file name; A_k maps to angle class k-1.

    Directory parts are ignored. Instance and index must be decimal digits;
    the widths written by format_filename (2 and 4) are not required.

    Raises:
        ParseError: Quoting the first component that does not match.
    """
    base = PurePath(name).name
    if not base.endswith(IMAGE_SUFFIX):
        raise ParseError(f"{base!r}: bad suffix (expected {IMAGE_SUFFIX})")
    parts = base[: -len(IMAGE_SUFFIX)].split("_")
    if len(parts) != 5:
        raise ParseError(
            f"{base!r}: expected 5 '_'-separated fields "
            f"<object>_<instance>_<H1|H2>_<A1..A8>_<index>, got {len(parts)}"
        )
    obj, instance, height, angle, index = parts

    try:
        kind = ObjectKind(obj)
    except ValueError:
        raise _field_error(base, "object", obj, "|".join(o.value for o in ObjectKind)) from None
    if not instance.isdigit() or int(instance) < 1:
        raise _field_error(base, "instance", instance, "a positive integer")
    try:
        level = Height(height)
    except ValueError:
        raise _field_error(base, "height", height, "H1|H2") from None
    if angle not in ANGLE_LABELS:
        raise _field_error(base, "angle", angle, "A1..A8")
    if not index.isdigit():
        raise _field_error(base, "index", index, "a non-negative integer")

    return ImageName(
        object=kind,
        instance=int(instance),
        height=level,
        angle_class=ANGLE_LABELS.index(angle),
        index=int(index),
    )


def format_filename(
    obj: ObjectKind, instance: int, height: Height, angle_class: int, index: int
) -> str:
    """Inverse of parse_filename, zero-padding instance to 2 and index to 4 digits."""
    return f"{obj.value}_{instance:02d}_{height.value}_{ANGLE_LABELS[angle_class]}_{index:04d}{IMAGE_SUFFIX}"


def mask_name_for(image_name: str) -> str:
    """`mug_03_H1_A5_0007.pgm` -> `mug_03_H1_A5_0007_mask.pgm`."""
    path = PurePath(image_name)
    return str(path.with_name(path.stem + MASK_SUFFIX + path.suffix))


def is_mask_name(name: str) -> bool:
    return PurePath(name).stem.endswith(MASK_SUFFIX)


def augmented_name(image_name: str, dx: int, dy: int) -> str:
    """`<stem>__dx{dx}_dy{dy}.pgm` for a shifted copy."""
    path = PurePath(image_name)
    return str(path.with_name(f"{path.stem}__dx{dx}_dy{dy}{path.suffix}"))
