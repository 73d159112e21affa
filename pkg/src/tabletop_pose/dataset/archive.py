"""Build a shift-augmented PGM archive from raw images and, usually, their masks."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

from tabletop_pose.dataset.image import DEFAULT_SHIFTS, apply_mask, shift_augment, to_unit
from tabletop_pose.dataset.manifest import ArchiveInfo, Manifest, ManifestRow
from tabletop_pose.dataset.naming import (
    IMAGE_SUFFIX,
    ImageName,
    augmented_name,
    is_mask_name,
    mask_name_for,
    parse_filename,
)
from tabletop_pose.dataset.pgm import read_pgm, write_unit_image
from tabletop_pose.dataset.workers import run_all
from tabletop_pose.errors import ConfigError, ParseError
from tabletop_pose.train.split import split_train_val
from tabletop_pose.types import ANGLE_LABELS, Height, Split

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class _ArchiveJob:
    image_path: Path
    mask_path: Path | None
    labels: ImageName
    out_root: Path
    shifts: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class ArchiveEntry:
    """A written file, before its split is known."""

    path: str
    labels: ImageName
    dx: int
    dy: int

    @property
    def group(self) -> str:
        return self.path.split("__", 1)[0].removesuffix(IMAGE_SUFFIX)


def _process(job: _ArchiveJob) -> list[ArchiveEntry]:
    """Mask one original (unless it has no mask path), write it and its shifted copies."""
    image = read_pgm(job.image_path)
    if job.mask_path is None:
        unit = to_unit(image)
    else:
        try:
            unit = apply_mask(image, read_pgm(job.mask_path))
        except ValueError as e:
            raise ParseError(f"{job.image_path}: {e}") from e

    relative = f"{job.labels.object.value}/{job.image_path.name}"
    write_unit_image(job.out_root / relative, unit)
    entries = [ArchiveEntry(relative, job.labels, 0, 0)]
    for (dx, dy), shifted in zip(job.shifts, shift_augment(unit, list(job.shifts))):
        name = augmented_name(relative, dx, dy)
        write_unit_image(job.out_root / name, shifted)
        entries.append(ArchiveEntry(name, job.labels, dx, dy))
    return entries


def _collect_jobs(
    input_dir: Path, output_dir: Path, shifts: tuple[tuple[int, int], ...], masked: bool
) -> list[_ArchiveJob]:
    jobs = []
    for image_path in sorted(input_dir.rglob(f"*{IMAGE_SUFFIX}")):
        if is_mask_name(image_path.name):
            continue
        try:
            labels = parse_filename(image_path.name)
        except ParseError as e:
            raise ParseError(f"{image_path}: {e}") from e
        if not masked:
            jobs.append(_ArchiveJob(image_path, None, labels, output_dir, shifts))
            continue
        mask_path = image_path.with_name(Path(mask_name_for(image_path.name)).name)
        if not mask_path.is_file():
            logger.warning(f"⚠ skipping {image_path}: no mask {mask_path.name}")
            continue
        jobs.append(_ArchiveJob(image_path, mask_path, labels, output_dir, shifts))
    return jobs


def assign_splits(entries: list[ArchiveEntry], val_fraction: float, seed: int) -> list[ManifestRow]:
    """H2 goes to test; H1 originals are split train/val with their shifted copies.

    Strata are (object, angle). A stratum with a single H1 original stays in
    train with a warning.
    """
    h1 = [e for e in entries if e.labels.height is Height.H1]
    _, val = split_train_val(
        h1,
        val_fraction,
        seed,
        stratum=lambda e: (e.labels.object.value, e.labels.angle_class),
        group=lambda e: e.group,
        strict=False,
    )
    val_paths = {e.path for e in val}

    rows = []
    for e in entries:
        if e.labels.height is Height.H2:
            split = Split.TEST
        else:
            split = Split.VAL if e.path in val_paths else Split.TRAIN
        rows.append(
            ManifestRow(
                path=e.path,
                object=e.labels.object,
                instance=e.labels.instance,
                height=e.labels.height,
                angle=ANGLE_LABELS[e.labels.angle_class],
                dx=e.dx,
                dy=e.dy,
                split=split,
            )
        )
    return rows


def build_archive(
    input_dir: str | Path,
    output_dir: str | Path,
    shifts: list[tuple[int, int]] | tuple[tuple[int, int], ...] = DEFAULT_SHIFTS,
    *,
    val_fraction: float = 0.1,
    seed: int = 0,
    workers: int = 1,
    masked: bool = True,
) -> Manifest:
    """Mask, augment and index every image under `input_dir`.

    Each `<name>.pgm` needs a `<name>_mask.pgm` beside it; images without one
    are skipped with a warning. With `masked=False` masks are ignored and every
    image keeps its raw pixels, for recognition models trained on unmasked
    scenes.

    Every kept original yields itself plus one shifted copy per entry of
    `shifts`, so N originals give N*(len(shifts)+1) manifest rows. Output goes
    to `<output_dir>/<object>/`, with `manifest.csv` and `archive.json` at
    the root.

    Raises:
        ParseError: For an unparsable name, an undecodable image or mask, or a
            mask with values other than 0/255 (message starts with the path).
        ConfigError: If a shift is (0, 0) or does not fit inside an image.
    """
    input_dir, output_dir = Path(input_dir), Path(output_dir)
    shifts = tuple((int(dx), int(dy)) for dx, dy in shifts)
    if (0, 0) in shifts:
        raise ConfigError("shift (0, 0) would duplicate the original")

    jobs = _collect_jobs(input_dir, output_dir, shifts, masked)
    kind = "masked" if masked else "unmasked"
    logger.info(f"Archiving {len(jobs)} {kind} original(s) with {len(shifts)} shift(s) each")
    entries = [entry for batch in run_all(_process, jobs, workers) for entry in batch]
    entries.sort(key=lambda e: e.path)

    manifest = Manifest(rows=assign_splits(entries, val_fraction, seed))
    manifest.write(output_dir)
    ArchiveInfo(masked=masked).write(output_dir)
    return manifest
