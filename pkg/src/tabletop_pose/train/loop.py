"""Mini-batch training with best-validation checkpointing."""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from tabletop_pose.errors import ConfigError, DimensionError, NumericError
from tabletop_pose.events.sink import EventSink, NullSink
from tabletop_pose.events.types import (
    BestCheckpointEvent,
    EpochEndEvent,
    TrainEndEvent,
    TrainStartEvent,
)
from tabletop_pose.nn.loss import softmax_xent_batch
from tabletop_pose.nn.network import Network
from tabletop_pose.train.checkpoint import Checkpoint, TrainingMetadata
from tabletop_pose.train.config import TrainConfig
from tabletop_pose.train.data import LabeledData
from tabletop_pose.train.evaluate import evaluate_network
from tabletop_pose.train.optimizer import RMSProp
from tabletop_pose.types import Mode, ObjectKind, Task

logger = logging.getLogger(__name__)


@dataclass
class EpochRecord:
    """One row of training history."""

    epoch: int
    train_loss: float
    train_acc: float
    val_acc: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrainResult:
    """The best checkpoint plus one history record per epoch."""

    best: Checkpoint
    history: list[EpochRecord] = field(default_factory=list)

    @property
    def best_epoch(self) -> int:
        return self.best.metadata.epoch

    @property
    def best_val_accuracy(self) -> float:
        return self.best.metadata.val_accuracy


def _check_compatible(network: Network, data: LabeledData, what: str) -> None:
    if len(data) == 0:
        raise ConfigError(f"{what} set is empty")
    if data.sample_shape != tuple(network.input_shape):
        raise DimensionError(
            f"{what} images are {list(data.sample_shape)}, {network.spec.name} expects "
            f"{list(network.input_shape)}"
        )
    if len(data.label_names) != network.spec.num_classes:
        raise DimensionError(
            f"{what} set has {len(data.label_names)} classes, {network.spec.name} outputs "
            f"{network.spec.num_classes}"
        )


def train(
    network: Network,
    train_data: LabeledData,
    val_data: LabeledData,
    config: TrainConfig,
    *,
    sink: EventSink | None = None,
    task: Task = Task.ANGLE,
    obj: ObjectKind | None = None,
    halve_input: bool = False,
    run_name: str = "",
) -> TrainResult:
    """Train `network` in place and return the best-validation checkpoint.

    Each epoch visits the training set in a fresh permutation drawn from a
    generator seeded with `config.seed`, updates with RMSProp after every
    batch, then measures validation accuracy in EVAL mode. The checkpoint is
    replaced only when validation accuracy strictly improves, so ties keep
    the earlier epoch. Reported train loss is the mean over batches of the
    per-batch mean cross-entropy; train accuracy counts TRAIN-mode
    predictions made during the epoch.

    Args:
        network: Network to train (modified in place).
        train_data: Training images and labels.
        val_data: Validation images and labels.
        config: Hyperparameters.
        sink: Receives TrainStart/EpochEnd/BestCheckpoint/TrainEnd events.
        task: Stored in the checkpoint metadata.
        obj: Object the angle model is for, stored in the metadata.
        halve_input: Whether inputs were halved, stored in the metadata.
        run_name: Copied onto every event.

    Raises:
        ConfigError: If either set is empty.
        DimensionError: If the data does not fit the network.
        NumericError: If the loss or a gradient becomes non-finite; carries
            the epoch and batch (1-based).
    """
    _check_compatible(network, train_data, "training")
    _check_compatible(network, val_data, "validation")
    sink = sink or NullSink()

    optimizer = RMSProp(network.parameters(), config)
    rng = np.random.default_rng(config.seed)
    n = len(train_data)
    num_batches = -(-n // config.batch_size)

    def metadata(epoch: int, val_accuracy: float) -> TrainingMetadata:
        return TrainingMetadata(
            epoch=epoch,
            val_accuracy=val_accuracy,
            seed=network.seed,
            config=config,
            task=task,
            object=obj,
            labels=list(train_data.label_names),
            halve_input=halve_input,
        )

    sink.emit(
        TrainStartEvent(
            run_name=run_name,
            network=network.spec.name,
            train_size=n,
            val_size=len(val_data),
            epochs=config.epochs,
            parameter_count=network.parameter_count(),
        )
    )
    logger.info(
        f"Training {network.spec.name}: {n} train / {len(val_data)} val samples, "
        f"{config.epochs} epoch(s), batch {config.batch_size}"
    )

    started = time.monotonic()
    best: Checkpoint | None = None
    history: list[EpochRecord] = []
    try:
        for epoch in range(1, config.epochs + 1):
            epoch_started = time.monotonic()
            order = rng.permutation(n)
            batch_losses: list[float] = []
            correct = 0
            for batch in range(1, num_batches + 1):
                idx = order[(batch - 1) * config.batch_size : batch * config.batch_size]
                images = train_data.images[idx]
                labels = train_data.labels[idx]

                logits = network.forward(images, Mode.TRAIN)
                try:
                    loss, _, dlogits = softmax_xent_batch(logits, labels)
                except NumericError as e:
                    raise NumericError(f"{e} at epoch {epoch}, batch {batch}", epoch=epoch, batch=batch) from e
                if not np.isfinite(loss):
                    raise NumericError(
                        f"loss diverged at epoch {epoch}, batch {batch}", epoch=epoch, batch=batch
                    )
                network.backward(dlogits)
                try:
                    optimizer.step(network.gradients())
                except NumericError as e:
                    raise NumericError(
                        f"{e} at epoch {epoch}, batch {batch}",
                        parameter=e.parameter,
                        epoch=epoch,
                        batch=batch,
                    ) from e

                batch_losses.append(loss)
                correct += int(np.sum(np.argmax(logits, axis=1) == labels))

            record = EpochRecord(
                epoch=epoch,
                train_loss=float(np.mean(batch_losses)),
                train_acc=correct / n,
                val_acc=evaluate_network(network, val_data).accuracy,
            )
            history.append(record)
            sink.emit(
                EpochEndEvent(
                    run_name=run_name,
                    duration_s=time.monotonic() - epoch_started,
                    **record.to_dict(),
                )
            )
            logger.info(
                f"  epoch {epoch}/{config.epochs}: loss {record.train_loss:.4f}, "
                f"train acc {record.train_acc:.3f}, val acc {record.val_acc:.3f}"
            )

            if best is None or record.val_acc > best.metadata.val_accuracy:
                best = Checkpoint.from_network(network, metadata(epoch, record.val_acc))
                sink.emit(BestCheckpointEvent(run_name=run_name, epoch=epoch, val_acc=record.val_acc))
                logger.debug(f"  new best checkpoint at epoch {epoch}")
    except Exception as e:
        sink.emit(
            TrainEndEvent(
                run_name=run_name,
                best_epoch=best.metadata.epoch if best else 0,
                best_val_acc=best.metadata.val_accuracy if best else 0.0,
                success=False,
                error=str(e),
                duration_s=time.monotonic() - started,
            )
        )
        raise

    assert best is not None
    sink.emit(
        TrainEndEvent(
            run_name=run_name,
            best_epoch=best.metadata.epoch,
            best_val_acc=best.metadata.val_accuracy,
            duration_s=time.monotonic() - started,
        )
    )
    logger.info(f"Best validation accuracy {best.metadata.val_accuracy:.3f} at epoch {best.metadata.epoch}")
    return TrainResult(best=best, history=history)
