"""Shared test fixtures for tabletop-pose tests."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Callable

import numpy as np
import pytest

from tabletop_pose.dataset.naming import format_filename, mask_name_for
from tabletop_pose.dataset.pgm import write_pgm
from tabletop_pose.dataset.synth import SynthConfig, synth_generate
from tabletop_pose.models.architectures import model_for
from tabletop_pose.nn.network import Network
from tabletop_pose.nn.spec import LayerSpec, NetworkSpec
from tabletop_pose.pose.home import HomePoseTable
from tabletop_pose.train.checkpoint import Checkpoint, TrainingMetadata
from tabletop_pose.types import ANGLE_LABELS, Height, ObjectKind, Task

RAW_SIZE = 24


# =============================================================================
# Core Fixtures
# =============================================================================


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for random test inputs."""
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_spec() -> NetworkSpec:
    """Small conv -> pool -> dense -> dropout -> dense net on 8x8 input, 3 classes."""
    return NetworkSpec(
        name="tiny",
        input_shape=(1, 8, 8),
        layers=[
            LayerSpec.conv2d(4, 3),
            LayerSpec.relu(),
            LayerSpec.maxpool2(),
            LayerSpec.flatten(),
            LayerSpec.dense(10),
            LayerSpec.relu(),
            LayerSpec.dropout(0.3),
            LayerSpec.dense(3),
        ],
        num_classes=3,
    )


@pytest.fixture
def tiny_network(tiny_spec: NetworkSpec) -> Network:
    """f32 network built from tiny_spec with seed 0."""
    return Network(tiny_spec, seed=0)


# =============================================================================
# Checkpoint Fixtures
# =============================================================================


@pytest.fixture
def angle_checkpoint() -> Checkpoint:
    """Untrained 32x32 mug angle model wrapped as a checkpoint."""
    network = Network(model_for(ObjectKind.MUG, 32, 32), seed=3)
    metadata = TrainingMetadata(
        epoch=1,
        val_accuracy=0.125,
        seed=3,
        task=Task.ANGLE,
        object=ObjectKind.MUG,
        labels=list(ANGLE_LABELS),
    )
    return Checkpoint.from_network(network, metadata)


# =============================================================================
# Dataset Fixtures
# =============================================================================


RawWriter = Callable[..., Path]


@pytest.fixture
def raw_dir(tmp_path: Path) -> Path:
    """Directory that write_raw fills with raw images and masks."""
    return tmp_path / "raw"


@pytest.fixture
def write_raw(raw_dir: Path) -> RawWriter:
    """Write a 24x24 raw capture (gray background, bright square) and, by default, its mask.

    The mask covers a 12x12 block around the square, so masking keeps the
    square and part of the background and blacks out the rest.
    """

    def write(
        obj: ObjectKind = ObjectKind.MUG,
        instance: int = 1,
        height: Height = Height.H1,
        angle_class: int = 0,
        index: int = 0,
        *,
        with_mask: bool = True,
    ) -> Path:
        name = format_filename(obj, instance, height, angle_class, index)
        image = np.full((1, RAW_SIZE, RAW_SIZE), 90, dtype=np.uint8)
        image[0, 8:16, 8:16] = 200 + index % 50
        path = write_pgm(raw_dir / name, image)
        if with_mask:
            mask = np.zeros_like(image)
            mask[0, 6:18, 6:18] = 255
            write_pgm(raw_dir / mask_name_for(name), mask)
        return path

    return write


@pytest.fixture
def ten_originals(write_raw: RawWriter, raw_dir: Path) -> Path:
    """Ten masked originals: 8 mug H1 (two angles x 4) and 2 mug H2."""
    for angle_class in (0, 1):
        for index in range(4):
            write_raw(ObjectKind.MUG, index % 2 + 1, Height.H1, angle_class, index)
    for index in range(2):
        write_raw(ObjectKind.MUG, 1, Height.H2, 0, index)
    return raw_dir


@pytest.fixture(scope="session")
def synth_archive(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """Noise-free 32x32 synthetic archive, 4 images per cell (192 images)."""
    root = tmp_path_factory.mktemp("synth")
    synth_generate(SynthConfig(per_cell=4, resolution=32, noise=0.0, seed=0, instances=4), root)
    return root


# =============================================================================
# Pose Fixtures
# =============================================================================


HOME_TABLE: dict[str, Any] = {
    "mug": {"x": 100.0, "y": 50.0, "home_angle": "A1"},
    "mouse": {"x": 20.0, "y": 80.0, "home_angle": "A3"},
    "stapler": {"x": 160.0, "y": 40.0, "home_angle": "A5"},
}


@pytest.fixture
def home_table() -> HomePoseTable:
    """Home poses for all three objects."""
    return HomePoseTable.model_validate(HOME_TABLE)


@pytest.fixture
def home_table_path(tmp_path: Path) -> Path:
    """HOME_TABLE written as a JSON file."""
    path = tmp_path / "home.json"
    path.write_text(json.dumps(HOME_TABLE), encoding="utf-8")
    return path
