"""Training hyperparameters."""

from __future__ import annotations

from pydantic import BaseModel, Field, field_validator

from tabletop_pose.types import Precision


class TrainConfig(BaseModel):
    """Hyperparameters for one training run.

    RMSProp with rho=0.9, eps=1e-8 and lr=1e-3, batches of 32, a stratified 10%
    validation split and 5 epochs. A learning rate of 0 is accepted and turns
    the run into a parameter no-op, which is how "train from initialization"
    checkpoints are produced.

    Example:
        config = TrainConfig(epochs=20, learning_rate=5e-4, seed=3)
    """

    model_config = {"extra": "forbid"}

    epochs: int = Field(default=5, ge=1)
    batch_size: int = Field(default=32, ge=1)
    learning_rate: float = Field(default=1e-3, ge=0.0)
    rmsprop_decay: float = 0.9
    rmsprop_epsilon: float = Field(default=1e-8, gt=0.0)
    val_fraction: float = 0.1
    seed: int = Field(default=0, ge=0)
    precision: Precision = Precision.F32

    @field_validator("rmsprop_decay")
    @classmethod
    def validate_decay(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError(f"rmsprop_decay must be in (0, 1), got {v}")
        return v

    @field_validator("val_fraction")
    @classmethod
    def validate_val_fraction(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError(f"val_fraction must be in (0, 1), got {v}")
        return v
