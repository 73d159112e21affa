"""Tests for train/loop.py - the training loop."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from tabletop_pose.dataset.manifest import load_samples
from tabletop_pose.dataset.sample import Sample
from tabletop_pose.dataset.synth import SynthConfig, synth_generate
from tabletop_pose.errors import ConfigError, DimensionError, NumericError
from tabletop_pose.events.sink import ListSink
from tabletop_pose.events.types import BestCheckpointEvent, EpochEndEvent, TrainEndEvent
from tabletop_pose.models.architectures import model_for
from tabletop_pose.nn.network import Network
from tabletop_pose.nn.spec import NetworkSpec
from tabletop_pose.train.config import TrainConfig
from tabletop_pose.train.data import LabeledData
from tabletop_pose.train.evaluate import evaluate_network
from tabletop_pose.train.loop import train
from tabletop_pose.types import OBJECT_LABELS, Height, ObjectKind, Split, Task


def toy_data(n: int, seed: int, size: int = 8) -> LabeledData:
    """Three classes told apart by which third of the image is bright."""
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % 3
    images = rng.random((n, 1, size, size)).astype(np.float32) * 0.2
    for i, label in enumerate(labels):
        images[i, 0, :, label * size // 3 : (label + 1) * size // 3] += 0.8
    return LabeledData(images=images, labels=labels.astype(np.int64), label_names=OBJECT_LABELS)


class TestTrain:
    """Tests for train."""

    def test_zero_learning_rate_is_a_no_op(self, tiny_network: Network) -> None:
        """One epoch at lr=0 keeps every parameter bitwise; the checkpoint is epoch 1."""
        before = {name: p.copy() for name, p in tiny_network.parameters().items()}
        result = train(tiny_network, toy_data(40, 0), toy_data(9, 1), TrainConfig(epochs=1, learning_rate=0.0))
        for name, value in tiny_network.parameters().items():
            assert value.tobytes() == before[name].tobytes()
            assert result.best.parameters[name].tobytes() == before[name].tobytes()
        assert result.best_epoch == 1
        assert len(result.history) == 1

    def test_ties_keep_the_earlier_epoch(self, tiny_network: Network) -> None:
        """Equal validation accuracy never replaces the best checkpoint."""
        result = train(tiny_network, toy_data(30, 0), toy_data(9, 1), TrainConfig(epochs=3, learning_rate=0.0))
        assert [r.val_acc for r in result.history] == [result.history[0].val_acc] * 3
        assert result.best_epoch == 1

    def test_history_has_one_record_per_epoch(self, tiny_network: Network) -> None:
        """Records are numbered from 1 and hold finite metrics."""
        result = train(tiny_network, toy_data(40, 0), toy_data(9, 1), TrainConfig(epochs=4, batch_size=8))
        assert [r.epoch for r in result.history] == [1, 2, 3, 4]
        for record in result.history:
            assert np.isfinite(record.train_loss)
            assert 0.0 <= record.train_acc <= 1.0
            assert 0.0 <= record.val_acc <= 1.0
        best = max(result.history, key=lambda r: r.val_acc)
        assert result.best_val_accuracy == best.val_acc
        assert result.best_epoch == best.epoch

    def test_deterministic(self, tiny_spec: NetworkSpec) -> None:
        """Same seed, config and data give a bitwise identical best checkpoint."""
        config = TrainConfig(epochs=3, batch_size=8, seed=5)
        runs = [
            train(Network(tiny_spec, seed=2), toy_data(40, 0), toy_data(9, 1), config) for _ in range(2)
        ]
        assert runs[0].best.to_bytes() == runs[1].best.to_bytes()
        assert [r.to_dict() for r in runs[0].history] == [r.to_dict() for r in runs[1].history]

    def test_learns_a_separable_problem(self, tiny_spec: NetworkSpec) -> None:
        """A few epochs on an easy problem beat chance by a wide margin."""
        network = Network(tiny_spec, seed=0)
        config = TrainConfig(epochs=15, batch_size=8, learning_rate=5e-3, seed=1)
        result = train(network, toy_data(90, 0), toy_data(30, 1), config)
        assert result.best_val_accuracy >= 0.7

    def test_events(self, tiny_network: Network) -> None:
        """Start, one epoch_end per epoch, best on improvement, end."""
        sink = ListSink()
        train(tiny_network, toy_data(20, 0), toy_data(9, 1), TrainConfig(epochs=2), sink=sink, run_name="r1")
        types = [e.type for e in sink.events]
        assert types[0] == "train_start"
        assert types[-1] == "train_end"
        assert types.count("epoch_end") == 2
        assert types[1:3] == ["epoch_end", "best_checkpoint"]
        assert all(e.run_name == "r1" for e in sink.events)
        end = sink.events[-1]
        assert isinstance(end, TrainEndEvent) and end.success
        best_events = [e for e in sink.events if isinstance(e, BestCheckpointEvent)]
        assert end.best_epoch == best_events[-1].epoch

    def test_metadata(self, tiny_network: Network) -> None:
        """The checkpoint records how it was trained."""
        config = TrainConfig(epochs=1, seed=9)
        result = train(
            tiny_network,
            toy_data(20, 0),
            toy_data(9, 1),
            config,
            task=Task.RECOGNITION,
            halve_input=True,
        )
        meta = result.best.metadata
        assert meta.task is Task.RECOGNITION
        assert meta.labels == list(OBJECT_LABELS)
        assert meta.halve_input
        assert meta.config == config
        assert meta.seed == tiny_network.seed

    def test_divergence_reports_epoch_and_batch(self, tiny_network: Network) -> None:
        """A non-finite loss aborts with its coordinates and a failed train_end."""
        tiny_network.parameters()["dense2.weight"][...] = np.nan
        sink = ListSink()
        with pytest.raises(NumericError) as exc_info:
            train(tiny_network, toy_data(20, 0), toy_data(9, 1), TrainConfig(epochs=2), sink=sink)
        assert (exc_info.value.epoch, exc_info.value.batch) == (1, 1)
        assert "logits" in str(exc_info.value)
        end = sink.events[-1]
        assert isinstance(end, TrainEndEvent)
        assert not end.success
        assert "epoch 1, batch 1" in (end.error or "")

    def test_empty_set(self, tiny_network: Network) -> None:
        """Empty training or validation data is a configuration error."""
        empty = LabeledData(
            images=np.zeros((0, 1, 8, 8), dtype=np.float32),
            labels=np.zeros(0, dtype=np.int64),
            label_names=OBJECT_LABELS,
        )
        with pytest.raises(ConfigError, match="training set is empty"):
            train(tiny_network, empty, toy_data(9, 1), TrainConfig(epochs=1))
        with pytest.raises(ConfigError, match="validation set is empty"):
            train(tiny_network, toy_data(9, 1), empty, TrainConfig(epochs=1))

    def test_shape_mismatch(self, tiny_network: Network) -> None:
        """Images must have the network's input shape."""
        with pytest.raises(DimensionError):
            train(tiny_network, toy_data(9, 0, size=9), toy_data(9, 1), TrainConfig(epochs=1))

    def test_history_records_match_events(self, tiny_network: Network) -> None:
        """epoch_end events carry the history values."""
        sink = ListSink()
        result = train(tiny_network, toy_data(20, 0), toy_data(9, 1), TrainConfig(epochs=2), sink=sink)
        events = [e for e in sink.events if isinstance(e, EpochEndEvent)]
        assert [(e.epoch, e.train_loss, e.val_acc) for e in events] == [
            (r.epoch, r.train_loss, r.val_acc) for r in result.history
        ]


@pytest.mark.slow
class TestOverfit:
    """Long-running overfit acceptance run."""

    def test_angle_net_overfits_64_synthetic_images(self, tmp_path: Path) -> None:
        """64 noise-free 64x64 mug renders reach 100% training accuracy within 200 epochs."""
        config = SynthConfig(per_cell=8, resolution=64, noise=0.0, seed=0, objects=[ObjectKind.MUG])
        manifest = synth_generate(config, tmp_path)
        rows = [r for r in manifest.rows if r.height is Height.H1]
        samples: list[Sample] = load_samples(tmp_path, rows)
        assert len(samples) == 64
        data = LabeledData.from_samples(samples, Task.ANGLE)
        network = Network(model_for(ObjectKind.MUG, 64, 64), seed=0)

        train(network, data, data, TrainConfig(epochs=200, seed=0))

        assert evaluate_network(network, data).accuracy == 1.0
        assert manifest.split_counts()[Split.TEST.value] == 64
