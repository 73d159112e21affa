"""The CSV index of an image archive."""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path, PurePosixPath
from typing import Iterable

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from tabletop_pose.dataset.pgm import read_unit_image
from tabletop_pose.dataset.sample import Sample
from tabletop_pose.errors import ConfigError, ParseError
from tabletop_pose.types import ANGLE_LABELS, Height, ObjectKind, Source, Split

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.csv"
MANIFEST_COLUMNS = ("path", "object", "instance", "height", "angle", "dx", "dy", "split")
ARCHIVE_INFO_NAME = "archive.json"


class ArchiveInfo(BaseModel):
    """How an archive was produced, kept as `archive.json` beside the manifest.

    An archive without the file is read as masked captures.

    Example:
        {"synthetic": false, "masked": false}
    """

    model_config = {"extra": "forbid"}

    synthetic: bool = False
    masked: bool = True

    def write(self, root: str | Path) -> Path:
        path = Path(root) / ARCHIVE_INFO_NAME
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.model_dump_json() + "\n", encoding="utf-8")
        return path

    @classmethod
    def read(cls, root: str | Path) -> ArchiveInfo:
        path = Path(root) / ARCHIVE_INFO_NAME
        if not path.is_file():
            return cls()
        try:
            return cls.model_validate_json(path.read_text(encoding="utf-8"))
        except ValidationError as e:
            raise ParseError(f"{path}: {e}") from e


class ManifestRow(BaseModel):
    """One archived image. `path` is relative to the archive root, '/'-separated."""

    path: str
    object: ObjectKind
    instance: int = Field(ge=1, le=99)
    height: Height
    angle: str
    dx: int = 0
    dy: int = 0
    split: Split

    @field_validator("path")
    @classmethod
    def validate_path(cls, v: str) -> str:
        posix = PurePosixPath(v)
        if posix.is_absolute() or ".." in posix.parts or "\\" in v:
            raise ValueError(f"manifest paths must be relative and '/'-separated, got {v!r}")
        return v

    @field_validator("angle")
    @classmethod
    def validate_angle(cls, v: str) -> str:
        if v not in ANGLE_LABELS:
            raise ValueError(f"angle must be one of A1..A8, got {v!r}")
        return v

    @model_validator(mode="after")
    def _check_height_split(self) -> ManifestRow:
        if (self.height is Height.H2) != (self.split is Split.TEST):
            raise ValueError(
                f"{self.path}: height {self.height.value} cannot be in split {self.split.value} "
                "(H2 rows are test, H1 rows are train/val)"
            )
        return self

    @property
    def angle_class(self) -> int:
        return ANGLE_LABELS.index(self.angle)

    @property
    def shift(self) -> tuple[int, int]:
        return (self.dx, self.dy)

    @property
    def group(self) -> str:
        """Path of the original an augmented row was shifted from (its own path otherwise)."""
        posix = PurePosixPath(self.path)
        stem = posix.stem.split("__", 1)[0]
        return str(posix.with_name(stem + posix.suffix))

    def to_csv_row(self) -> list[str]:
        return [
            self.path,
            self.object.value,
            str(self.instance),
            self.height.value,
            self.angle,
            str(self.dx),
            str(self.dy),
            self.split.value,
        ]


class Manifest(BaseModel):
    """Rows kept sorted by path; paths are unique."""

    rows: list[ManifestRow] = []

    @model_validator(mode="after")
    def _sort_and_check_unique(self) -> Manifest:
        self.rows.sort(key=lambda r: r.path)
        for a, b in zip(self.rows, self.rows[1:]):
            if a.path == b.path:
                raise ValueError(f"duplicate manifest path {a.path!r}")
        return self

    def __len__(self) -> int:
        return len(self.rows)

    def select(
        self,
        split: Split | Iterable[Split] | None = None,
        obj: ObjectKind | None = None,
    ) -> list[ManifestRow]:
        """Rows in the given split(s) and, optionally, for one object."""
        if split is None:
            splits = set(Split)
        elif isinstance(split, Split):
            splits = {split}
        else:
            splits = set(split)
        return [r for r in self.rows if r.split in splits and (obj is None or r.object is obj)]

    def split_counts(self) -> dict[str, int]:
        return {s.value: sum(1 for r in self.rows if r.split is s) for s in Split}

    # --- CSV ---

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(MANIFEST_COLUMNS)
        for row in self.rows:
            writer.writerow(row.to_csv_row())
        return buffer.getvalue()

    @classmethod
    def from_csv(cls, text: str, source: str = "<manifest>") -> Manifest:
        """Parse manifest CSV text.

        Raises:
            ParseError: On a wrong header or an invalid row (with its line number).
        """
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header is None or tuple(header) != MANIFEST_COLUMNS:
            raise ParseError(f"{source}: header must be {','.join(MANIFEST_COLUMNS)}, got {header}")
        rows = []
        for line_no, values in enumerate(reader, start=2):
            if not values:
                continue
            if len(values) != len(MANIFEST_COLUMNS):
                raise ParseError(f"{source}:{line_no}: expected {len(MANIFEST_COLUMNS)} columns, got {len(values)}")
            try:
                rows.append(ManifestRow(**dict(zip(MANIFEST_COLUMNS, values))))
            except ValidationError as e:
                raise ParseError(f"{source}:{line_no}: {e}") from e
        try:
            return cls(rows=rows)
        except ValidationError as e:
            raise ParseError(f"{source}: {e}") from e

    def write(self, root: str | Path) -> Path:
        """Write `manifest.csv` under `root` (UTF-8, LF)."""
        path = Path(root) / MANIFEST_NAME
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv(), encoding="utf-8", newline="")
        return path

    @classmethod
    def read(cls, root: str | Path) -> Manifest:
        path = Path(root) / MANIFEST_NAME
        if not path.is_file():
            raise ConfigError(f"no {MANIFEST_NAME} in {root}")
        return cls.from_csv(path.read_text(encoding="utf-8"), source=str(path))

    def check_files(self, root: str | Path) -> None:
        """Every referenced file exists and decodes.

        Raises:
            ParseError: Naming the first missing or undecodable file.
        """
        for row in self.rows:
            path = Path(root) / row.path
            if not path.is_file():
                raise ParseError(f"{path}: listed in the manifest but missing")
            read_unit_image(path)


def sample_from_row(root: str | Path, row: ManifestRow, *, synthetic: bool = False) -> Sample:
    """Decode one row. Unshifted rows of a synthetic archive are SYNTHETIC samples."""
    if row.shift != (0, 0):
        source = Source.AUGMENTED
    else:
        source = Source.SYNTHETIC if synthetic else Source.ORIGINAL
    return Sample(
        image=read_unit_image(Path(root) / row.path),
        object=row.object,
        instance=row.instance,
        height=row.height,
        angle_class=row.angle_class,
        shift=row.shift,
        source=source,
        path=row.path,
        group=row.group,
    )


def load_samples(root: str | Path, rows: list[ManifestRow], workers: int = 4) -> list[Sample]:
    """Decode rows into samples, in row order, on a thread pool."""
    synthetic = ArchiveInfo.read(root).synthetic
    if workers <= 1 or len(rows) < 2:
        return [sample_from_row(root, row, synthetic=synthetic) for row in rows]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda row: sample_from_row(root, row, synthetic=synthetic), rows))
