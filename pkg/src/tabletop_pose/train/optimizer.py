"""RMSProp."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from tabletop_pose.errors import DimensionError, NumericError
from tabletop_pose.train.config import TrainConfig


@dataclass
class OptimizerState:
    """Running mean-square accumulators, one per parameter, same shapes."""

    mean_square: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def zeros_like(cls, params: dict[str, np.ndarray]) -> OptimizerState:
        return cls({name: np.zeros_like(p) for name, p in params.items()})


def rmsprop_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: OptimizerState,
    config: TrainConfig,
) -> None:
    """One RMSProp update, in place on `params` and `state`.

        r     <- rho * r + (1 - rho) * g**2
        theta <- theta - lr * g / (sqrt(r) + eps)

    Every gradient is checked before anything is written, so a non-finite
    gradient leaves both parameters and accumulators untouched.

    Raises:
        NumericError: If a gradient holds NaN or inf (names the parameter).
        DimensionError: If names or shapes of params, grads and state differ.
    """
    if set(grads) != set(params) or set(state.mean_square) != set(params):
        raise DimensionError(
            f"optimizer names differ: params {sorted(params)}, grads {sorted(grads)}"
        )
    for name, g in grads.items():
        if g.shape != params[name].shape or state.mean_square[name].shape != g.shape:
            raise DimensionError(
                f"{name}: gradient shape {list(g.shape)} does not match {list(params[name].shape)}"
            )
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient for parameter {name!r}", parameter=name)

    rho = config.rmsprop_decay
    lr = config.learning_rate
    eps = config.rmsprop_epsilon
    for name, theta in params.items():
        g = grads[name]
        r = state.mean_square[name]
        r *= rho
        r += (1.0 - rho) * g * g
        if lr != 0.0:
            theta -= (lr * g / (np.sqrt(r) + eps)).astype(theta.dtype, copy=False)


class RMSProp:
    """Stateful wrapper binding an OptimizerState to a parameter dict.

    Example:
        opt = RMSProp(network.parameters(), config)
        network.backward(dlogits)
        opt.step(network.gradients())
    """

    def __init__(self, params: dict[str, np.ndarray], config: TrainConfig):
        self.params = params
        self.config = config
        self.state = OptimizerState.zeros_like(params)

    def step(self, grads: dict[str, np.ndarray]) -> None:
        rmsprop_step(self.params, grads, self.state, self.config)
