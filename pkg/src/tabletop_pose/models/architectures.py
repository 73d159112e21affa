"""The recognition and angle architectures.

Both are pure functions of the input resolution. The recognition net pools
after each of its two convolutions; without that the dense layer at 240x320
input would need roughly 7e8 weights.
"""

from __future__ import annotations

import math

from tabletop_pose.errors import ConfigError, DimensionError
from tabletop_pose.nn.spec import LayerSpec, NetworkSpec
from tabletop_pose.types import NUM_ANGLE_CLASSES, ObjectKind

RECOGNITION_MIN_INPUT = 8
ANGLE_MIN_INPUT = 32
ANGLE_CONV_CHANNELS = (16, 32, 64, 70, 80)
DEFAULT_ANGLE_INPUT = (64, 64)


def _conv_block(out_channels: int, kernel: int) -> list[LayerSpec]:
    return [LayerSpec.conv2d(out_channels, kernel), LayerSpec.relu(), LayerSpec.maxpool2()]


def recognition_net(input_h: int, input_w: int) -> NetworkSpec:
    """conv64@3x3 -> conv32@3x3 (each ReLU + 2x2 pool) -> dense300 -> dense3."""
    if min(input_h, input_w) < RECOGNITION_MIN_INPUT:
        raise DimensionError(
            f"recognition net needs input >= {RECOGNITION_MIN_INPUT}x{RECOGNITION_MIN_INPUT}, "
            f"got {input_h}x{input_w}"
        )
    layers = [
        *_conv_block(64, 3),
        *_conv_block(32, 3),
        LayerSpec.flatten(),
        LayerSpec.dense(300),
        LayerSpec.relu(),
        LayerSpec.dense(len(ObjectKind)),
    ]
    return NetworkSpec(
        name="recognition",
        input_shape=(1, input_h, input_w),
        layers=layers,
        num_classes=len(ObjectKind),
    )


def angle_net(input_h: int, input_w: int) -> NetworkSpec:
    """Five conv blocks (16@5x5, then 32/64/70/80@3x3) -> dense300 -> dropout 0.3 -> dense8."""
    if min(input_h, input_w) < ANGLE_MIN_INPUT:
        raise DimensionError(
            f"angle net needs input >= {ANGLE_MIN_INPUT}x{ANGLE_MIN_INPUT} to survive five "
            f"poolings, got {input_h}x{input_w}"
        )
    first, *rest = ANGLE_CONV_CHANNELS
    layers = [*_conv_block(first, 5)]
    for channels in rest:
        layers += _conv_block(channels, 3)
    layers += [
        LayerSpec.flatten(),
        LayerSpec.dense(300),
        LayerSpec.relu(),
        LayerSpec.dropout(0.3),
        LayerSpec.dense(NUM_ANGLE_CLASSES),
    ]
    return NetworkSpec(
        name="angle",
        input_shape=(1, input_h, input_w),
        layers=layers,
        num_classes=NUM_ANGLE_CLASSES,
    )


def model_for(
    obj: ObjectKind | str,
    input_h: int = DEFAULT_ANGLE_INPUT[0],
    input_w: int = DEFAULT_ANGLE_INPUT[1],
) -> NetworkSpec:
    """The per-object angle model: the angle architecture named `angle-<object>`."""
    try:
        kind = ObjectKind(obj)
    except ValueError:
        known = ", ".join(o.value for o in ObjectKind)
        raise ConfigError(f"unknown object {obj!r} (expected one of: {known})") from None
    return angle_net(input_h, input_w).with_name(f"angle-{kind.value}")


def parameter_count(spec: NetworkSpec) -> dict[str, int]:
    """Trainable parameters per layer (weights plus biases), without building the net."""
    counts: dict[str, int] = {}
    for name, shape in spec.parameter_shapes().items():
        layer = name.split(".", 1)[0]
        counts[layer] = counts.get(layer, 0) + math.prod(shape)
    return counts
