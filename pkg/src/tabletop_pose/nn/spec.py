"""Declarative architecture description.

A NetworkSpec is an ordered list of LayerSpecs plus the input shape. It is
validated end to end on construction: every layer must accept the shape the
previous one produces and the last layer must emit one logit per class.
"""

from __future__ import annotations

import math
from collections import Counter
from typing import Literal

from pydantic import BaseModel, Field, field_validator, model_validator

from tabletop_pose.errors import DimensionError
from tabletop_pose.types import LayerKind

Shape = tuple[int, ...]

_NAME_PREFIX = {
    LayerKind.CONV2D: "conv",
    LayerKind.MAXPOOL2: "pool",
    LayerKind.DENSE: "dense",
    LayerKind.RELU: "relu",
    LayerKind.DROPOUT: "dropout",
    LayerKind.FLATTEN: "flatten",
}


class LayerSpec(BaseModel):
    """One layer of a network.

    Only the fields relevant to `kind` are used: conv2d needs out_channels and
    kernel, dense needs out_units, dropout needs rate.
    """

    kind: LayerKind
    name: str | None = None
    out_channels: int | None = None
    kernel: int | None = None
    stride: int = 1
    padding: Literal["same", "valid"] = "same"
    out_units: int | None = None
    rate: float | None = None

    @field_validator("stride")
    @classmethod
    def validate_stride(cls, v: int) -> int:
        if v != 1:
            raise ValueError("only stride 1 is supported")
        return v

    @model_validator(mode="after")
    def _validate_kind_fields(self) -> LayerSpec:
        if self.kind is LayerKind.CONV2D:
            if self.out_channels is None or self.out_channels < 1:
                raise ValueError("conv2d needs out_channels >= 1")
            if self.kernel is None or self.kernel < 1:
                raise ValueError("conv2d needs kernel >= 1")
            if self.padding == "same" and self.kernel % 2 == 0:
                raise ValueError(f"same padding needs an odd kernel, got {self.kernel}")
        elif self.kind is LayerKind.DENSE:
            if self.out_units is None or self.out_units < 1:
                raise ValueError("dense needs out_units >= 1")
        elif self.kind is LayerKind.DROPOUT:
            if self.rate is None or not (0.0 <= self.rate < 1.0):
                raise ValueError("dropout rate must be in [0, 1)")
        return self

    # --- constructors ---

    @classmethod
    def conv2d(cls, out_channels: int, kernel: int, padding: Literal["same", "valid"] = "same") -> LayerSpec:
        return cls(kind=LayerKind.CONV2D, out_channels=out_channels, kernel=kernel, padding=padding)

    @classmethod
    def maxpool2(cls) -> LayerSpec:
        return cls(kind=LayerKind.MAXPOOL2)

    @classmethod
    def dense(cls, out_units: int) -> LayerSpec:
        return cls(kind=LayerKind.DENSE, out_units=out_units)

    @classmethod
    def relu(cls) -> LayerSpec:
        return cls(kind=LayerKind.RELU)

    @classmethod
    def dropout(cls, rate: float) -> LayerSpec:
        return cls(kind=LayerKind.DROPOUT, rate=rate)

    @classmethod
    def flatten(cls) -> LayerSpec:
        return cls(kind=LayerKind.FLATTEN)

    # --- shape arithmetic ---

    @property
    def pad(self) -> int:
        """Zero padding applied on every side by a conv layer."""
        if self.kind is not LayerKind.CONV2D or self.padding == "valid":
            return 0
        assert self.kernel is not None
        return (self.kernel - 1) // 2

    def output_shape(self, input_shape: Shape) -> Shape:
        """Shape this layer produces for a single sample of `input_shape`."""
        label = self.name or self.kind.value
        if self.kind is LayerKind.CONV2D:
            if len(input_shape) != 3:
                raise DimensionError(f"{label}: expects [c,h,w] input, got {list(input_shape)}")
            assert self.kernel is not None and self.out_channels is not None
            _, h, w = input_shape
            out_h = h + 2 * self.pad - self.kernel + 1
            out_w = w + 2 * self.pad - self.kernel + 1
            if out_h < 1 or out_w < 1:
                raise DimensionError(f"{label}: {self.kernel}x{self.kernel} kernel larger than input {h}x{w}")
            return (self.out_channels, out_h, out_w)
        if self.kind is LayerKind.MAXPOOL2:
            if len(input_shape) != 3:
                raise DimensionError(f"{label}: expects [c,h,w] input, got {list(input_shape)}")
            c, h, w = input_shape
            if h < 2 or w < 2:
                raise DimensionError(f"{label}: input {h}x{w} smaller than the 2x2 pooling window")
            return (c, h // 2, w // 2)
        if self.kind is LayerKind.FLATTEN:
            return (math.prod(input_shape),)
        if self.kind is LayerKind.DENSE:
            if len(input_shape) != 1:
                raise DimensionError(f"{label}: expects flat input, got {list(input_shape)}")
            assert self.out_units is not None
            return (self.out_units,)
        return tuple(input_shape)


class NetworkSpec(BaseModel):
    """An ordered, shape-checked stack of layers ending in class logits."""

    name: str
    input_shape: tuple[int, int, int]
    layers: list[LayerSpec] = Field(min_length=1)
    num_classes: int = Field(ge=2)

    @model_validator(mode="after")
    def _name_layers_and_check_chain(self) -> NetworkSpec:
        counts: Counter[LayerKind] = Counter()
        for layer in self.layers:
            counts[layer.kind] += 1
            if layer.name is None:
                layer.name = f"{_NAME_PREFIX[layer.kind]}{counts[layer.kind]}"
        names = [layer.name for layer in self.layers]
        if len(set(names)) != len(names):
            raise ValueError(f"layer names must be unique, got {names}")

        final = self.shape_chain()[-1]
        if final != (self.num_classes,):
            raise ValueError(
                f"network ends in shape {list(final)}, expected [{self.num_classes}] class logits"
            )
        return self

    def shape_chain(self) -> list[Shape]:
        """Shapes from the input through every layer's output."""
        shapes: list[Shape] = [tuple(self.input_shape)]
        for layer in self.layers:
            shapes.append(layer.output_shape(shapes[-1]))
        return shapes

    def parameter_shapes(self) -> dict[str, Shape]:
        """Shapes of every trainable tensor keyed `<layer>.<param>`, in layer order."""
        shapes: dict[str, Shape] = {}
        for layer, in_shape in zip(self.layers, self.shape_chain()):
            if layer.kind is LayerKind.CONV2D:
                assert layer.out_channels is not None and layer.kernel is not None
                shapes[f"{layer.name}.weight"] = (layer.out_channels, in_shape[0], layer.kernel, layer.kernel)
                shapes[f"{layer.name}.bias"] = (layer.out_channels,)
            elif layer.kind is LayerKind.DENSE:
                assert layer.out_units is not None
                shapes[f"{layer.name}.weight"] = (math.prod(in_shape), layer.out_units)
                shapes[f"{layer.name}.bias"] = (layer.out_units,)
        return shapes

    def with_name(self, name: str) -> NetworkSpec:
        return self.model_copy(update={"name": name}, deep=True)

    def structure(self) -> list[dict]:
        """Layer list without the network name, for structural comparison."""
        return [layer.model_dump() for layer in self.layers]
