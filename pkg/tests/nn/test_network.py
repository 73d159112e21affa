"""Tests for nn/network.py - building, running and updating a Network."""

from __future__ import annotations

import numpy as np
import pytest

from tabletop_pose.errors import DimensionError
from tabletop_pose.nn.layers import Dropout
from tabletop_pose.nn.network import Network
from tabletop_pose.nn.spec import NetworkSpec
from tabletop_pose.types import Mode, Precision


class TestNetwork:
    """Tests for Network."""

    def test_same_seed_same_weights(self, tiny_spec: NetworkSpec) -> None:
        """A network is determined by spec, seed and precision."""
        a = Network(tiny_spec, seed=5).parameters()
        b = Network(tiny_spec, seed=5).parameters()
        assert a.keys() == b.keys()
        for name in a:
            assert a[name].tobytes() == b[name].tobytes()

    def test_different_seed_different_weights(self, tiny_spec: NetworkSpec) -> None:
        """Another seed draws other weights."""
        a = Network(tiny_spec, seed=5).parameters()["conv1.weight"]
        b = Network(tiny_spec, seed=6).parameters()["conv1.weight"]
        assert not np.array_equal(a, b)

    def test_precision(self, tiny_spec: NetworkSpec) -> None:
        """Parameters use the requested dtype."""
        assert Network(tiny_spec).parameters()["dense1.weight"].dtype == np.float32
        assert Network(tiny_spec, precision=Precision.F64).parameters()["dense1.weight"].dtype == np.float64

    def test_forward_sample_and_batch(self, tiny_network: Network, rng: np.random.Generator) -> None:
        """A sample gives [k] logits, a batch gives [n,k]."""
        assert tiny_network.forward(rng.random((1, 8, 8))).shape == (3,)
        assert tiny_network.forward(rng.random((5, 1, 8, 8))).shape == (5, 3)

    def test_wrong_input_shape(self, tiny_network: Network) -> None:
        """Inputs must match the NetworkSpec input shape."""
        with pytest.raises(DimensionError, match="does not match"):
            tiny_network.forward(np.zeros((1, 9, 8)))

    def test_eval_is_pure(self, tiny_network: Network, rng: np.random.Generator) -> None:
        """EVAL forwards are bitwise identical."""
        x = rng.random((4, 1, 8, 8)).astype(np.float32)
        assert tiny_network.forward(x).tobytes() == tiny_network.forward(x).tobytes()

    def test_predict_proba_sums_to_one(self, tiny_network: Network) -> None:
        """Probabilities form a distribution, even for a black image."""
        probs = tiny_network.predict_proba(np.zeros((1, 8, 8)))
        assert probs.sum() == pytest.approx(1.0, abs=1e-6)
        assert np.all(probs >= 0)

    def test_backward_fills_gradients(self, tiny_network: Network, rng: np.random.Generator) -> None:
        """After backward every parameter has a gradient of its own shape."""
        tiny_network.forward(rng.random((2, 1, 8, 8)), Mode.TRAIN)
        dx = tiny_network.backward(np.ones((2, 3), dtype=np.float32))
        assert dx.shape == (2, 1, 8, 8)
        grads = tiny_network.gradients()
        params = tiny_network.parameters()
        assert grads.keys() == params.keys()
        for name in params:
            assert grads[name].shape == params[name].shape

    def test_set_parameters(self, tiny_spec: NetworkSpec, tiny_network: Network) -> None:
        """Copying parameters makes two networks compute the same function."""
        other = Network(tiny_spec, seed=99)
        other.set_parameters(tiny_network.parameters())
        x = np.random.default_rng(0).random((1, 8, 8)).astype(np.float32)
        np.testing.assert_array_equal(other.forward(x), tiny_network.forward(x))

    def test_set_parameters_checks_names_and_shapes(self, tiny_network: Network) -> None:
        """Missing names or wrong shapes are rejected."""
        params = dict(tiny_network.parameters())
        params.pop("dense2.bias")
        with pytest.raises(DimensionError, match="missing"):
            tiny_network.set_parameters(params)
        params["dense2.bias"] = np.zeros(4, dtype=np.float32)
        with pytest.raises(DimensionError, match="dense2.bias"):
            tiny_network.set_parameters(params)

    def test_parameter_count(self, tiny_network: Network) -> None:
        """conv 4*9+4, dense 64*10+10, dense 10*3+3."""
        assert tiny_network.parameter_count() == 40 + 650 + 33

    def test_dropout_disabled_restores(self, tiny_network: Network) -> None:
        """dropout_disabled turns dropout off only inside the block."""
        dropouts = [layer for layer in tiny_network.layers if isinstance(layer, Dropout)]
        assert len(dropouts) == 1
        with tiny_network.dropout_disabled():
            assert not dropouts[0].enabled
        assert dropouts[0].enabled

    def test_train_mode_dropout_is_seeded(self, tiny_spec: NetworkSpec, rng: np.random.Generator) -> None:
        """Two networks with one seed drop the same units."""
        x = rng.random((3, 1, 8, 8)).astype(np.float32)
        a = Network(tiny_spec, seed=2).forward(x, Mode.TRAIN)
        b = Network(tiny_spec, seed=2).forward(x, Mode.TRAIN)
        np.testing.assert_array_equal(a, b)

    def test_conv_layers_and_activations(self, tiny_network: Network) -> None:
        """activations lists every layer; conv_layers picks the convolutions."""
        captured = tiny_network.activations(np.zeros((1, 8, 8)))
        assert [index for index, _, _ in captured] == list(range(8))
        assert [(i, layer.name) for i, layer in tiny_network.conv_layers()] == [(0, "conv1")]
        with pytest.raises(DimensionError):
            tiny_network.activations(np.zeros((2, 1, 8, 8)))
