"""Synthetic tabletop scenes.

Renders antialiased silhouettes of the three objects on black, rotated to the
eight angle classes and seen from two heights, with the same object x
instance x angle x height structure as a real capture session.

Geometry (x right, y up, counterclockwise angles, A_k at (k-1)*45 degrees):

    image point -> undo offset -> rotate by -theta -> undo height -> shape test

Height is modelled in the object's own frame as a squash of its local y axis
plus a small shear. Keeping it in the object frame makes rotation exact: with
no jitter, the A3 render equals `np.rot90` of the A1 render bit for bit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from tabletop_pose.dataset.archive import ArchiveEntry, assign_splits
from tabletop_pose.dataset.manifest import ArchiveInfo, Manifest
from tabletop_pose.dataset.naming import ImageName, format_filename
from tabletop_pose.dataset.pgm import write_unit_image
from tabletop_pose.dataset.workers import run_all
from tabletop_pose.types import NUM_ANGLE_CLASSES, Height, ObjectKind

logger = logging.getLogger(__name__)

HEIGHT_SCALE_Y = {Height.H1: 0.9, Height.H2: 0.6}
HEIGHT_SHEAR = {Height.H1: 0.05, Height.H2: 0.12}

# Object half-length as a share of the canvas side.
_EXTENT = 0.32

# Reflectance bands; instances of one object share a material.
_BRIGHTNESS = {
    ObjectKind.MOUSE: (0.45, 0.6),
    ObjectKind.STAPLER: (0.68, 0.8),
    ObjectKind.MUG: (0.88, 1.0),
}

_MUG_RADIUS = 0.62  # share of half-length
_MUG_OPENING = 0.7  # inner radius of the rim, share of the mug radius
_MUG_OPENING_SHADE = 0.4  # opening brightness relative to the rim


class SynthConfig(BaseModel):
    """Synthetic dataset parameters.

    A cell is one (object, angle, height); each gets `per_cell` images whose
    instances cycle through 1..instances.

    Example:
        config = SynthConfig(per_cell=10, resolution=64, seed=3, noise=0.0)
    """

    model_config = {"extra": "forbid"}

    instances: int = Field(default=10, ge=1, le=99)
    per_cell: int = Field(default=10, ge=1, le=9999)
    noise: float = Field(default=0.02, ge=0.0)
    seed: int = Field(default=0, ge=0)
    resolution: int = 64
    angle_jitter_deg: float = Field(default=4.0, ge=0.0, lt=22.5)
    offset_jitter_px: float = Field(default=2.0, ge=0.0)
    mouse_asymmetry: tuple[float, float] = (0.0, 0.08)
    supersample: int = Field(default=4, ge=1, le=16)
    objects: list[ObjectKind] = Field(default_factory=lambda: list(ObjectKind), min_length=1)

    @field_validator("resolution")
    @classmethod
    def validate_resolution(cls, v: int) -> int:
        if v < 32:
            raise ValueError(f"resolution must be >= 32, got {v}")
        return v

    @field_validator("mouse_asymmetry")
    @classmethod
    def validate_asymmetry(cls, v: tuple[float, float]) -> tuple[float, float]:
        low, high = v
        if not 0.0 <= low <= high < 0.5:
            raise ValueError(f"mouse_asymmetry must satisfy 0 <= low <= high < 0.5, got {v}")
        return v

    @model_validator(mode="after")
    def _check_offset_fits(self) -> SynthConfig:
        if self.offset_jitter_px > self.resolution * 0.1:
            raise ValueError(
                f"offset_jitter_px {self.offset_jitter_px} would push objects off a "
                f"{self.resolution}px canvas"
            )
        return self

    def cell_count(self) -> int:
        return len(self.objects) * NUM_ANGLE_CLASSES * len(Height)

    def image_count(self) -> int:
        return self.cell_count() * self.per_cell


@dataclass(frozen=True)
class InstanceShape:
    """Per-instance shape parameters."""

    scale: float = 1.0
    aspect: float = 5.0  # length / width
    notch: float = 0.55  # stapler notch centre, share of half-length
    handle: float = 0.45  # mug handle length, share of radius
    asymmetry: float = 0.0  # mouse egg factor, 0 = point symmetric
    brightness: float = 0.85

    @classmethod
    def draw(cls, obj: ObjectKind, instance: int, config: SynthConfig) -> InstanceShape:
        """Seeded parameters of one instance; independent of per_cell and workers."""
        rng = np.random.default_rng([config.seed, 1, obj.index, instance])
        scale = float(rng.uniform(0.9, 1.1))
        brightness = float(rng.uniform(*_BRIGHTNESS[obj]))
        if obj is ObjectKind.STAPLER:
            return cls(scale, float(rng.uniform(4.6, 5.4)), float(rng.uniform(0.45, 0.65)), brightness=brightness)
        if obj is ObjectKind.MUG:
            return cls(scale, 1.0, handle=float(rng.uniform(0.35, 0.55)), brightness=brightness)
        low, high = config.mouse_asymmetry
        return cls(
            scale,
            float(rng.uniform(1.35, 1.45)),
            asymmetry=float(rng.uniform(low, high)),
            brightness=brightness,
        )


def _cos_sin(degrees: float) -> tuple[float, float]:
    """cos and sin, exact at multiples of 90 degrees."""
    if degrees % 90 == 0:
        return [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][int(degrees // 90) % 4]
    radians = math.radians(degrees)
    return math.cos(radians), math.sin(radians)


def _sample_points(resolution: int, supersample: int) -> tuple[np.ndarray, np.ndarray]:
    """Sub-pixel sample coordinates relative to the canvas centre, y up.

    Returned arrays broadcast to `[row, sub_row, col, sub_col]`. The sub-pixel
    offsets are symmetric about each pixel centre.
    """
    offsets = (np.arange(supersample) + 0.5) / supersample - 0.5
    centre = resolution / 2
    along = np.arange(resolution)[:, None] + 0.5 + offsets[None, :] - centre
    x = along[None, None, :, :]
    y = -along[:, :, None, None]
    return x, y


def _stapler(xs: np.ndarray, ys: np.ndarray, half: float, shape: InstanceShape) -> np.ndarray:
    """Capsule of length 2*half along x with a notch bitten out of its upper edge."""
    b = half / shape.aspect
    core = half - b
    nearest = np.clip(xs, -core, core)
    body = (xs - nearest) ** 2 + ys**2 <= b * b
    notch = (xs - half * shape.notch) ** 2 + (ys - b) ** 2 <= (0.7 * b) ** 2
    return body & ~notch


def _mug(xs: np.ndarray, ys: np.ndarray, half: float, shape: InstanceShape) -> np.ndarray:
    """Disc with a handle stub pointing along +x."""
    r = _MUG_RADIUS * half
    body = xs**2 + ys**2 <= r * r
    handle = (xs >= 0.7 * r) & (xs <= r * (1.0 + shape.handle)) & (np.abs(ys) <= 0.28 * r)
    return body | handle


def _mug_opening(xs: np.ndarray, ys: np.ndarray, half: float) -> np.ndarray:
    r = _MUG_OPENING * _MUG_RADIUS * half
    return xs**2 + ys**2 <= r * r


def _mouse(xs: np.ndarray, ys: np.ndarray, half: float, shape: InstanceShape) -> np.ndarray:
    """Ellipse with major axis along x, widened toward +x by the asymmetry factor."""
    a = 0.78 * half
    t = xs / a
    b = (a / shape.aspect) * np.maximum(1.0 + shape.asymmetry * t, 1e-6)
    return t**2 + (ys / b) ** 2 <= 1.0


_SHAPES = {ObjectKind.STAPLER: _stapler, ObjectKind.MUG: _mug, ObjectKind.MOUSE: _mouse}


def render_silhouette(
    obj: ObjectKind,
    shape: InstanceShape,
    angle_deg: float,
    height: Height,
    resolution: int,
    *,
    offset: tuple[float, float] = (0.0, 0.0),
    supersample: int = 4,
) -> np.ndarray:
    """Noise-free `[1,R,R]` float32 render in [0,1].

    Pixel value is the instance brightness times the share of sub-pixel
    samples that land inside the silhouette. Samples inside a mug's opening
    count at `_MUG_OPENING_SHADE` of the rim.
    """
    x, y = _sample_points(resolution, supersample)
    x = x - offset[0]
    y = y - offset[1]
    c, s = _cos_sin(angle_deg)
    xo = c * x + s * y
    yo = -s * x + c * y
    ys = yo / HEIGHT_SCALE_Y[height]
    xs = xo - HEIGHT_SHEAR[height] * ys

    half = _EXTENT * resolution * shape.scale
    inside = _SHAPES[obj](xs, ys, half, shape)
    coverage = inside.mean(axis=(1, 3))
    if obj is ObjectKind.MUG:
        opening = _mug_opening(xs, ys, half).mean(axis=(1, 3))
        coverage = coverage - (1.0 - _MUG_OPENING_SHADE) * opening
    return (shape.brightness * coverage).astype(np.float32)[None, :, :]


@dataclass(frozen=True)
class _SynthJob:
    config: SynthConfig
    out_root: Path
    obj: ObjectKind
    height: Height
    angle_class: int
    index: int


def _render_job(job: _SynthJob) -> ArchiveEntry:
    config = job.config
    instance = job.index % config.instances + 1
    shape = InstanceShape.draw(job.obj, instance, config)
    rng = np.random.default_rng(
        [config.seed, 2, job.obj.index, list(Height).index(job.height), job.angle_class, job.index]
    )
    jitter = rng.uniform(-1.0, 1.0, size=3) if (config.angle_jitter_deg or config.offset_jitter_px) else np.zeros(3)
    angle = job.angle_class * 45.0 + config.angle_jitter_deg * float(jitter[0])
    offset = (config.offset_jitter_px * float(jitter[1]), config.offset_jitter_px * float(jitter[2]))

    image = render_silhouette(
        job.obj, shape, angle, job.height, config.resolution, offset=offset, supersample=config.supersample
    )
    if config.noise > 0:
        image = np.clip(image + rng.normal(0.0, config.noise, image.shape), 0.0, 1.0)

    name = format_filename(job.obj, instance, job.height, job.angle_class, job.index)
    relative = f"{job.obj.value}/{name}"
    write_unit_image(job.out_root / relative, image)
    return ArchiveEntry(
        relative,
        ImageName(job.obj, instance, job.height, job.angle_class, job.index),
        0,
        0,
    )


def synth_generate(
    config: SynthConfig, output_dir: str | Path, *, val_fraction: float = 0.1, workers: int = 1
) -> Manifest:
    """Render the whole synthetic dataset and write its manifest.

    Produces objects x 8 angles x 2 heights x per_cell PGMs under
    `<output_dir>/<object>/`. H2 images form the test split; H1 images are
    split train/val per (object, angle), `val_fraction` of each going to
    validation. Output is bitwise identical for a given config whatever the
    worker count.
    """
    output_dir = Path(output_dir)
    jobs = [
        _SynthJob(config, output_dir, obj, height, angle_class, index)
        for obj in config.objects
        for height in Height
        for angle_class in range(NUM_ANGLE_CLASSES)
        for index in range(config.per_cell)
    ]
    logger.info(f"Rendering {len(jobs)} synthetic image(s) at {config.resolution}x{config.resolution}")
    entries = sorted(run_all(_render_job, jobs, workers), key=lambda e: e.path)

    manifest = Manifest(rows=assign_splits(entries, val_fraction, config.seed))
    manifest.write(output_dir)
    ArchiveInfo(synthetic=True).write(output_dir)
    return manifest
