"""Tests for pose/home.py."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from tabletop_pose.errors import ConfigError
from tabletop_pose.pose.home import HomePose, HomePoseTable, home_transform, load_home_table
from tabletop_pose.pose.transform import pose_transform
from tabletop_pose.types import ObjectKind


class TestHomePoseTable:
    """Tests for HomePoseTable and load_home_table."""

    def test_load(self, home_table_path: Path) -> None:
        """Every object gets its pose."""
        table = load_home_table(home_table_path)
        assert table[ObjectKind.MOUSE] == HomePose(x=20.0, y=80.0, home_angle="A3")
        assert table["stapler"].angle_class == 4
        assert table["mug"].position == (100.0, 50.0)

    def test_unknown_object_lookup(self, home_table: HomePoseTable) -> None:
        """Looking up an object outside the table is a configuration error."""
        with pytest.raises(ConfigError, match="keyboard"):
            home_table["keyboard"]

    def test_missing_object(self) -> None:
        """The table needs one entry per object."""
        with pytest.raises(ValidationError, match="missing stapler"):
            HomePoseTable.model_validate(
                {"mug": {"x": 0, "y": 0, "home_angle": "A1"}, "mouse": {"x": 0, "y": 0, "home_angle": "A1"}}
            )

    def test_bad_angle(self) -> None:
        """Home angles are A1..A8."""
        with pytest.raises(ValidationError, match="A1..A8"):
            HomePose(x=0.0, y=0.0, home_angle="A9")

    def test_missing_file(self, tmp_path: Path) -> None:
        """A missing file is reported as such."""
        with pytest.raises(ConfigError, match="not found"):
            load_home_table(tmp_path / "nope.json")

    @pytest.mark.parametrize(
        "text",
        [
            "{not json",
            json.dumps({o.value: {"x": 0, "y": 0, "home_angle": "A1"} for o in ObjectKind} | {"cup": {}}),
            json.dumps({o.value: {"x": 0, "y": 0, "home_angle": "A1", "z": 1} for o in ObjectKind}),
        ],
    )
    def test_invalid_file(self, tmp_path: Path, text: str) -> None:
        """Malformed JSON, unknown objects and unknown fields are configuration errors."""
        path = tmp_path / "home.json"
        path.write_text(text, encoding="utf-8")
        with pytest.raises(ConfigError, match="invalid home table"):
            load_home_table(path)


class TestHomeTransform:
    """Tests for home_transform."""

    def test_identity(self, home_table: HomePoseTable) -> None:
        """At home already: the exact identity."""
        t = home_transform(ObjectKind.MUG, 0, (100.0, 50.0), home_table)
        assert np.array_equal(t.matrix, np.eye(3))

    def test_quarter_turn(self, home_table: HomePoseTable) -> None:
        """Predicted A3 with home A1 at the home position is a -90 degree turn about it."""
        t = home_transform(ObjectKind.MUG, 2, (100.0, 50.0), home_table)
        np.testing.assert_array_equal(t.rotation, [[0.0, 1.0], [-1.0, 0.0]])
        assert t.translation == (50.0, 150.0)
        assert t.apply((100.0, 50.0)) == (100.0, 50.0)

    def test_unknown_object(self, home_table: HomePoseTable) -> None:
        """Objects outside the table are refused."""
        with pytest.raises(ConfigError):
            home_transform("cup", 0, (0.0, 0.0), home_table)

    def test_bad_class(self, home_table: HomePoseTable) -> None:
        """Predicted classes outside 0..7 are refused."""
        with pytest.raises(ConfigError):
            home_transform(ObjectKind.MUG, 8, (0.0, 0.0), home_table)

    def test_random_cases(self, home_table: HomePoseTable) -> None:
        """1,000 random cases: centroid lands home, rotation stays rigid, swapping roles inverts."""
        rng = np.random.default_rng(2024)
        objects = list(ObjectKind)
        for _ in range(1000):
            obj = objects[int(rng.integers(0, 3))]
            predicted = int(rng.integers(0, 8))
            current = (float(rng.uniform(-500.0, 500.0)), float(rng.uniform(-500.0, 500.0)))
            home = home_table[obj]

            t = home_transform(obj, predicted, current, home_table)
            np.testing.assert_allclose(t.apply(current), home.position, atol=1e-9)
            assert t.is_rigid(tol=1e-12)
            assert abs(t.degrees) <= 180.0 + 1e-9

            back = pose_transform(home.angle_class * 45.0, home.position, predicted * 45.0, current)
            np.testing.assert_allclose(back.compose(t).matrix, np.eye(3), atol=1e-9)

    def test_orientation_reaches_home(self, home_table: HomePoseTable) -> None:
        """Current angle plus the rotation is the home angle modulo 360."""
        for predicted in range(8):
            t = home_transform(ObjectKind.STAPLER, predicted, (1.0, 2.0), home_table)
            gap = (predicted * 45.0 + t.degrees - 180.0) % 360.0
            assert min(gap, 360.0 - gap) < 1e-9
