"""A sequential network instantiated from a NetworkSpec."""

from __future__ import annotations

import math
from contextlib import contextmanager
from typing import Iterator

import numpy as np

from tabletop_pose.errors import DimensionError
from tabletop_pose.nn.layers import Conv2D, Dropout, Layer, build_layer
from tabletop_pose.nn.loss import softmax
from tabletop_pose.nn.spec import NetworkSpec
from tabletop_pose.tensor import Tensor
from tabletop_pose.types import Mode, Precision


class Network:
    """Layers built from a spec, with seeded He-uniform weights.

    Weights come from one generator seeded with `seed`; each dropout layer gets
    its own child stream of the same seed, so a network is fully determined by
    (spec, seed, precision).

    Example:
        net = Network(angle_net(64, 64), seed=7)
        logits = net.forward(batch, Mode.TRAIN)
        net.backward(dlogits)
        grads = net.gradients()
    """

    def __init__(self, spec: NetworkSpec, seed: int = 0, precision: Precision = Precision.F32):
        self.spec = spec
        self.seed = seed
        self.precision = precision
        dtype = precision.dtype

        weight_rng = np.random.default_rng(seed)
        dropout_seeds = np.random.SeedSequence(seed).spawn(len(spec.layers))
        shapes = spec.shape_chain()
        self.layers: list[Layer] = [
            build_layer(layer_spec, shapes[i], weight_rng, np.random.default_rng(dropout_seeds[i]), dtype)
            for i, layer_spec in enumerate(spec.layers)
        ]

    @property
    def dtype(self) -> np.dtype:
        return self.precision.dtype

    @property
    def input_shape(self) -> tuple[int, int, int]:
        return self.spec.input_shape

    def _prepare_input(self, x: np.ndarray) -> np.ndarray:
        expected = tuple(self.spec.input_shape)
        if x.shape != expected and x.shape[1:] != expected:
            raise DimensionError(
                f"{self.spec.name}: input shape {list(x.shape)} does not match {list(expected)}"
            )
        return x.astype(self.dtype, copy=False)

    def forward(self, x: Tensor, mode: Mode = Mode.EVAL) -> Tensor:
        """Logits for one `[1,h,w]` sample or an `[n,1,h,w]` batch."""
        out = self._prepare_input(x)
        for layer in self.layers:
            out = layer.forward(out, mode)
        return out

    def backward(self, dlogits: Tensor) -> Tensor:
        """Backpropagate a logit gradient; returns the input gradient."""
        grad = dlogits.astype(self.dtype, copy=False)
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def predict_proba(self, x: Tensor) -> Tensor:
        return softmax(self.forward(x, Mode.EVAL))

    def activations(self, x: Tensor) -> list[tuple[int, Layer, Tensor]]:
        """EVAL-mode output of every layer for a single sample."""
        out = self._prepare_input(x)
        if out.ndim != 3:
            raise DimensionError("activations are computed for a single [1,h,w] sample")
        captured = []
        for index, layer in enumerate(self.layers):
            out = layer.forward(out, Mode.EVAL)
            captured.append((index, layer, out))
        return captured

    def conv_layers(self) -> list[tuple[int, Conv2D]]:
        return [(i, layer) for i, layer in enumerate(self.layers) if isinstance(layer, Conv2D)]

    # --- parameters ---

    def parameters(self) -> dict[str, np.ndarray]:
        """Live parameter arrays keyed `<layer>.<param>`, in layer order."""
        return {
            f"{layer.name}.{pname}": array
            for layer in self.layers
            for pname, array in layer.state.parameters.items()
        }

    def gradients(self) -> dict[str, np.ndarray]:
        """Gradients from the last backward pass, keyed like parameters()."""
        return {
            f"{layer.name}.{pname}": array
            for layer in self.layers
            for pname, array in layer.state.gradients.items()
        }

    def set_parameters(self, values: dict[str, np.ndarray]) -> None:
        """Copy values into the live parameters; names and shapes must match exactly."""
        params = self.parameters()
        if set(values) != set(params):
            missing = sorted(set(params) - set(values))
            extra = sorted(set(values) - set(params))
            raise DimensionError(f"parameter names differ: missing {missing}, unexpected {extra}")
        for name, target in params.items():
            value = values[name]
            if value.shape != target.shape:
                raise DimensionError(
                    f"{name}: shape {list(value.shape)} does not match {list(target.shape)}"
                )
            target[...] = value

    def parameter_count(self) -> int:
        return sum(math.prod(p.shape) for p in self.parameters().values())

    @contextmanager
    def dropout_disabled(self) -> Iterator[Network]:
        """Temporarily turn every dropout layer into the identity."""
        dropouts = [layer for layer in self.layers if isinstance(layer, Dropout)]
        previous = [layer.enabled for layer in dropouts]
        for layer in dropouts:
            layer.enabled = False
        try:
            yield self
        finally:
            for layer, enabled in zip(dropouts, previous):
                layer.enabled = enabled

    def __repr__(self) -> str:
        return f"Network({self.spec.name}, {len(self.layers)} layers, {self.precision.value})"
