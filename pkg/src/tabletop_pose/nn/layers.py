"""Layers with explicit forward and backward passes.

Every layer accepts a single sample (`[c,h,w]` for spatial layers, `[in]` for
dense) or a batch with a leading sample axis, and returns the same rank it was
given. A forward pass in TRAIN mode fills `state.cache`; EVAL mode leaves it
empty and is a pure function of the input and parameters. `backward` reads the
cache, stores parameter gradients in `state.gradients` and returns the gradient
with respect to the input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, ClassVar

import numpy as np

from tabletop_pose.errors import DimensionError, StateError
from tabletop_pose.nn.spec import LayerSpec, Shape
from tabletop_pose.tensor import Tensor, col2im_batch, im2col_batch
from tabletop_pose.types import LayerKind, Mode


@dataclass
class LayerState:
    """Parameters, their gradients and the forward cache of one layer."""

    parameters: dict[str, np.ndarray] = field(default_factory=dict)
    gradients: dict[str, np.ndarray] = field(default_factory=dict)
    cache: dict[str, Any] = field(default_factory=dict)


def he_uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int, dtype: np.dtype) -> np.ndarray:
    """Uniform weights in [-sqrt(6/fan_in), sqrt(6/fan_in)]."""
    bound = math.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


class Layer:
    """Base class: batching, cache bookkeeping and the shape contract."""

    kind: ClassVar[LayerKind]
    sample_rank: int = 3

    def __init__(self, spec: LayerSpec, input_shape: Shape, dtype: np.dtype = np.dtype(np.float32)):
        self.spec = spec
        self.name: str = spec.name or spec.kind.value
        self.input_shape: Shape = tuple(input_shape)
        self.output_shape: Shape = spec.output_shape(self.input_shape)
        self.dtype = np.dtype(dtype)
        self.state = LayerState()

    def _batched(self, x: np.ndarray) -> tuple[np.ndarray, bool]:
        if x.ndim == self.sample_rank:
            return x[np.newaxis], True
        if x.ndim == self.sample_rank + 1:
            return x, False
        raise DimensionError(
            f"{self.name}: expected rank {self.sample_rank} sample or rank "
            f"{self.sample_rank + 1} batch, got shape {list(x.shape)}"
        )

    def _require_cache(self, *keys: str) -> None:
        missing = [k for k in keys if k not in self.state.cache]
        if missing:
            raise StateError(f"{self.name}: backward called without a TRAIN-mode forward pass")

    def _finish_forward(self, out: np.ndarray, single: bool, mode: Mode, **cache: Any) -> np.ndarray:
        if mode is Mode.TRAIN:
            self.state.cache = {"single": single, **cache}
        else:
            self.state.cache = {}
        return out[0] if single else out

    def _check_upstream(self, upstream: np.ndarray, expected: tuple[int, ...]) -> np.ndarray:
        single = self.state.cache["single"]
        batched = upstream[np.newaxis] if single else upstream
        if batched.shape != expected:
            raise DimensionError(
                f"{self.name}: upstream gradient shape {list(upstream.shape)} does not match output"
            )
        return batched

    def forward(self, x: Tensor, mode: Mode = Mode.EVAL) -> Tensor:
        raise NotImplementedError

    def backward(self, upstream: Tensor) -> Tensor:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name}: {list(self.input_shape)} -> {list(self.output_shape)})"


class Conv2D(Layer):
    """2D cross-correlation computed as im2col followed by one matrix multiply."""

    kind = LayerKind.CONV2D

    def __init__(
        self,
        spec: LayerSpec,
        input_shape: Shape,
        rng: np.random.Generator,
        dtype: np.dtype = np.dtype(np.float32),
    ):
        super().__init__(spec, input_shape, dtype)
        assert spec.kernel is not None and spec.out_channels is not None
        self.kernel = spec.kernel
        self.pad = spec.pad
        in_c = self.input_shape[0]
        fan_in = in_c * self.kernel * self.kernel
        self.state.parameters = {
            "weight": he_uniform(rng, (spec.out_channels, in_c, self.kernel, self.kernel), fan_in, self.dtype),
            "bias": np.zeros(spec.out_channels, dtype=self.dtype),
        }

    def forward(self, x: Tensor, mode: Mode = Mode.EVAL) -> Tensor:
        xb, single = self._batched(x)
        weight = self.state.parameters["weight"]
        bias = self.state.parameters["bias"]
        out_c, in_c, k, _ = weight.shape
        if xb.shape[1] != in_c:
            raise DimensionError(
                f"{self.name}: input has {xb.shape[1]} channels, weights expect {in_c}"
            )
        n, _, h, w = xb.shape
        out_h = h + 2 * self.pad - k + 1
        out_w = w + 2 * self.pad - k + 1
        cols = im2col_batch(xb, k, k, 1, self.pad)
        out = weight.reshape(out_c, -1) @ cols
        out = out.reshape(out_c, n, out_h, out_w).transpose(1, 0, 2, 3)
        out = np.ascontiguousarray(out) + bias[np.newaxis, :, np.newaxis, np.newaxis]
        return self._finish_forward(out, single, mode, input=xb, cols=cols)

    def backward(self, upstream: Tensor) -> Tensor:
        self._require_cache("input", "cols")
        xb: np.ndarray = self.state.cache["input"]
        cols: np.ndarray = self.state.cache["cols"]
        weight = self.state.parameters["weight"]
        out_c, _, k, _ = weight.shape
        n, _, h, w = xb.shape
        up = self._check_upstream(upstream, (n, out_c, h + 2 * self.pad - k + 1, w + 2 * self.pad - k + 1))

        up2 = up.transpose(1, 0, 2, 3).reshape(out_c, -1)
        self.state.gradients = {
            "weight": (up2 @ cols.T).reshape(weight.shape),
            "bias": up.sum(axis=(0, 2, 3)),
        }
        dcols = weight.reshape(out_c, -1).T @ up2
        dx = col2im_batch(dcols, xb.shape, k, k, 1, self.pad)
        return dx[0] if self.state.cache["single"] else dx


class MaxPool2(Layer):
    """2x2 max pooling, stride 2. Odd trailing rows/columns are dropped.

    Ties resolve to the first maximum in row-major window order.
    """

    kind = LayerKind.MAXPOOL2

    def forward(self, x: Tensor, mode: Mode = Mode.EVAL) -> Tensor:
        xb, single = self._batched(x)
        n, c, h, w = xb.shape
        if h < 2 or w < 2:
            raise DimensionError(f"{self.name}: input {h}x{w} smaller than the 2x2 window")
        oh, ow = h // 2, w // 2
        blocks = (
            xb[:, :, : 2 * oh, : 2 * ow]
            .reshape(n, c, oh, 2, ow, 2)
            .transpose(0, 1, 2, 4, 3, 5)
            .reshape(n, c, oh, ow, 4)
        )
        argmax = blocks.argmax(axis=-1)
        out = np.take_along_axis(blocks, argmax[..., np.newaxis], axis=-1)[..., 0]
        return self._finish_forward(out, single, mode, input_shape=xb.shape, argmax=argmax)

    def backward(self, upstream: Tensor) -> Tensor:
        self._require_cache("argmax")
        n, c, h, w = self.state.cache["input_shape"]
        argmax: np.ndarray = self.state.cache["argmax"]
        up = self._check_upstream(upstream, argmax.shape)
        oh, ow = argmax.shape[2:]

        blocks = np.zeros((n, c, oh, ow, 4), dtype=up.dtype)
        np.put_along_axis(blocks, argmax[..., np.newaxis], up[..., np.newaxis], axis=-1)
        dx = np.zeros((n, c, h, w), dtype=up.dtype)
        dx[:, :, : 2 * oh, : 2 * ow] = (
            blocks.reshape(n, c, oh, ow, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, 2 * oh, 2 * ow)
        )
        return dx[0] if self.state.cache["single"] else dx


class Dense(Layer):
    """Fully connected layer: y = x W + b with W of shape [in, out]."""

    kind = LayerKind.DENSE
    sample_rank = 1

    def __init__(
        self,
        spec: LayerSpec,
        input_shape: Shape,
        rng: np.random.Generator,
        dtype: np.dtype = np.dtype(np.float32),
    ):
        super().__init__(spec, input_shape, dtype)
        assert spec.out_units is not None
        fan_in = self.input_shape[0]
        self.state.parameters = {
            "weight": he_uniform(rng, (fan_in, spec.out_units), fan_in, self.dtype),
            "bias": np.zeros(spec.out_units, dtype=self.dtype),
        }

    def forward(self, x: Tensor, mode: Mode = Mode.EVAL) -> Tensor:
        xb, single = self._batched(x)
        weight = self.state.parameters["weight"]
        if xb.shape[1] != weight.shape[0]:
            raise DimensionError(
                f"{self.name}: input width {xb.shape[1]} does not match weights {list(weight.shape)}"
            )
        out = xb @ weight + self.state.parameters["bias"]
        return self._finish_forward(out, single, mode, input=xb)

    def backward(self, upstream: Tensor) -> Tensor:
        self._require_cache("input")
        xb: np.ndarray = self.state.cache["input"]
        weight = self.state.parameters["weight"]
        up = self._check_upstream(upstream, (xb.shape[0], weight.shape[1]))
        self.state.gradients = {"weight": xb.T @ up, "bias": up.sum(axis=0)}
        dx = up @ weight.T
        return dx[0] if self.state.cache["single"] else dx


class ReLU(Layer):
    """max(0, x). The subgradient at exactly 0 is 0."""

    kind = LayerKind.RELU

    def __init__(self, spec: LayerSpec, input_shape: Shape, dtype: np.dtype = np.dtype(np.float32)):
        super().__init__(spec, input_shape, dtype)
        self.sample_rank = len(self.input_shape)

    def forward(self, x: Tensor, mode: Mode = Mode.EVAL) -> Tensor:
        xb, single = self._batched(x)
        return self._finish_forward(np.maximum(xb, 0), single, mode, mask=xb > 0)

    def backward(self, upstream: Tensor) -> Tensor:
        self._require_cache("mask")
        mask: np.ndarray = self.state.cache["mask"]
        up = self._check_upstream(upstream, mask.shape)
        dx = up * mask
        return dx[0] if self.state.cache["single"] else dx


def dropout(
    x: Tensor,
    rate: float,
    mode: Mode,
    rng: np.random.Generator,
) -> tuple[Tensor, np.ndarray | None]:
    """Inverted dropout.

    Returns the output and the scaling mask (None when nothing was dropped).
    In TRAIN mode each element is zeroed with probability `rate` and survivors
    are scaled by 1/(1-rate); in EVAL mode, or with rate 0, x is returned as is.
    """
    if not (0.0 <= rate < 1.0):
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if mode is Mode.EVAL or rate == 0.0:
        return x, None
    keep = rng.random(x.shape) >= rate
    mask = keep.astype(x.dtype) / x.dtype.type(1.0 - rate)
    return x * mask, mask


class Dropout(Layer):
    """Inverted dropout layer with its own seeded random stream."""

    kind = LayerKind.DROPOUT

    def __init__(
        self,
        spec: LayerSpec,
        input_shape: Shape,
        rng: np.random.Generator,
        dtype: np.dtype = np.dtype(np.float32),
    ):
        super().__init__(spec, input_shape, dtype)
        self.sample_rank = len(self.input_shape)
        self.rate: float = spec.rate or 0.0
        self.rng = rng
        self.enabled = True

    def forward(self, x: Tensor, mode: Mode = Mode.EVAL) -> Tensor:
        xb, single = self._batched(x)
        rate = self.rate if self.enabled else 0.0
        out, mask = dropout(xb, rate, mode, self.rng)
        return self._finish_forward(out, single, mode, mask=mask, batch_shape=xb.shape)

    def backward(self, upstream: Tensor) -> Tensor:
        self._require_cache("mask")
        mask: np.ndarray | None = self.state.cache["mask"]
        up = self._check_upstream(upstream, self.state.cache["batch_shape"])
        dx = up if mask is None else up * mask
        return dx[0] if self.state.cache["single"] else dx


class Flatten(Layer):
    """Collapse a `[c,h,w]` sample into a vector."""

    kind = LayerKind.FLATTEN

    def __init__(self, spec: LayerSpec, input_shape: Shape, dtype: np.dtype = np.dtype(np.float32)):
        super().__init__(spec, input_shape, dtype)
        self.sample_rank = len(self.input_shape)

    def forward(self, x: Tensor, mode: Mode = Mode.EVAL) -> Tensor:
        xb, single = self._batched(x)
        out = xb.reshape(xb.shape[0], -1)
        return self._finish_forward(out, single, mode, batch_shape=xb.shape)

    def backward(self, upstream: Tensor) -> Tensor:
        self._require_cache("batch_shape")
        shape = self.state.cache["batch_shape"]
        up = self._check_upstream(upstream, (shape[0], math.prod(shape[1:])))
        dx = up.reshape(shape)
        return dx[0] if self.state.cache["single"] else dx


def build_layer(
    spec: LayerSpec,
    input_shape: Shape,
    rng: np.random.Generator,
    dropout_rng: np.random.Generator,
    dtype: np.dtype = np.dtype(np.float32),
) -> Layer:
    """Instantiate the layer described by `spec`."""
    if spec.kind is LayerKind.CONV2D:
        return Conv2D(spec, input_shape, rng, dtype)
    if spec.kind is LayerKind.DENSE:
        return Dense(spec, input_shape, rng, dtype)
    if spec.kind is LayerKind.MAXPOOL2:
        return MaxPool2(spec, input_shape, dtype)
    if spec.kind is LayerKind.RELU:
        return ReLU(spec, input_shape, dtype)
    if spec.kind is LayerKind.DROPOUT:
        return Dropout(spec, input_shape, dropout_rng, dtype)
    if spec.kind is LayerKind.FLATTEN:
        return Flatten(spec, input_shape, dtype)
    raise ValueError(f"unknown layer kind {spec.kind!r}")
