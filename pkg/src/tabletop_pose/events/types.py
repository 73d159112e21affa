"""Pydantic event models for training runs.

Every event a training run emits is defined here with a consistent schema, so
JSONL logs can be replayed or read by other tools.
"""

from __future__ import annotations

from datetime import datetime, timezone
from typing import Annotated, Literal, Union

from pydantic import BaseModel, Field


def _utc_now() -> datetime:
    return datetime.now(timezone.utc)


class BaseEvent(BaseModel):
    """Base class for all events."""

    timestamp: datetime = Field(default_factory=_utc_now)
    run_name: str = ""

    model_config = {"extra": "allow"}


class TrainStartEvent(BaseEvent):
    """Emitted once before the first epoch."""

    type: Literal["train_start"] = "train_start"
    network: str = ""
    train_size: int = 0
    val_size: int = 0
    epochs: int = 0
    parameter_count: int = 0


class EpochEndEvent(BaseEvent):
    """Emitted after each epoch's validation pass."""

    type: Literal["epoch_end"] = "epoch_end"
    epoch: int = 0
    train_loss: float = 0.0
    train_acc: float = 0.0
    val_acc: float = 0.0
    duration_s: float | None = None


class BestCheckpointEvent(BaseEvent):
    """Emitted when an epoch beats the best validation accuracy so far."""

    type: Literal["best_checkpoint"] = "best_checkpoint"
    epoch: int = 0
    val_acc: float = 0.0


class TrainEndEvent(BaseEvent):
    """Emitted when training finishes or aborts."""

    type: Literal["train_end"] = "train_end"
    best_epoch: int = 0
    best_val_acc: float = 0.0
    success: bool = True
    error: str | None = None
    duration_s: float | None = None


# Union of all event types for type checking
Event = Annotated[
    Union[
        TrainStartEvent,
        EpochEndEvent,
        BestCheckpointEvent,
        TrainEndEvent,
    ],
    Field(discriminator="type"),
]
