"""Finite-difference gradient checking.

Compares backprop gradients to central differences
(L(theta + eps) - L(theta - eps)) / 2 eps, entry by entry, reporting the
largest relative error |a - n| / max(|a|, |n|, 1e-8) per parameter tensor.

ReLU and max pooling are only piecewise smooth. When a perturbation moves an
activation across a ReLU kink or changes a pooling winner, the central
difference straddles two linear pieces and says nothing about the backprop
gradient, so such entries are skipped and counted instead of compared.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from pydantic import BaseModel, Field

from tabletop_pose.errors import ConfigError, NumericError
from tabletop_pose.nn.layers import MaxPool2, ReLU
from tabletop_pose.nn.loss import softmax_xent
from tabletop_pose.nn.network import Network
from tabletop_pose.tensor import Tensor
from tabletop_pose.types import Mode, Precision

REL_ERROR_FLOOR = 1e-8

Pattern = list[np.ndarray]


class ParameterCheck(BaseModel):
    """Result for one parameter tensor."""

    name: str
    max_rel_error: float
    entries_checked: int
    entries_skipped: int = 0


class GradientCheckReport(BaseModel):
    """Per-parameter maximum relative errors of one gradient check."""

    eps: float
    parameters: list[ParameterCheck] = Field(default_factory=list)

    @property
    def max_rel_error(self) -> float:
        return max((p.max_rel_error for p in self.parameters), default=0.0)

    @property
    def entries_checked(self) -> int:
        return sum(p.entries_checked for p in self.parameters)

    def passed(self, tolerance: float = 1e-4) -> bool:
        return self.max_rel_error < tolerance

    def worst(self) -> ParameterCheck | None:
        return max(self.parameters, key=lambda p: p.max_rel_error, default=None)


def relative_error(analytic: np.ndarray | float, numeric: np.ndarray | float) -> np.ndarray:
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    return np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), REL_ERROR_FLOOR)


def _select_entries(analytic: np.ndarray, max_entries: int | None) -> np.ndarray:
    if max_entries is None or analytic.size <= max_entries:
        return np.arange(analytic.size)
    # the largest-magnitude entries carry the signal; tiny ones only measure roundoff
    order = np.argsort(-np.abs(analytic.ravel()), kind="stable")
    return np.sort(order[:max_entries])


def _same_pattern(a: Pattern, b: Pattern) -> bool:
    return len(a) == len(b) and all(np.array_equal(x, y) for x, y in zip(a, b))


def compare_gradients(
    loss_fn: Callable[[], float],
    params: dict[str, np.ndarray],
    analytic: dict[str, np.ndarray],
    eps: float = 1e-5,
    max_entries: int | None = None,
    pattern_fn: Callable[[], Pattern] | None = None,
) -> GradientCheckReport:
    """Check `analytic` against central differences of `loss_fn`.

    `params` are perturbed in place (and restored); `loss_fn` must read them.
    If `pattern_fn` is given it is called after every loss evaluation and
    must describe the piecewise-linear state of that evaluation (ReLU masks,
    pooling winners); entries whose perturbations change it are skipped.
    """
    base_pattern = None
    if pattern_fn is not None:
        loss_fn()
        base_pattern = pattern_fn()

    report = GradientCheckReport(eps=eps)
    for name, theta in params.items():
        grad = analytic[name]
        flat = theta.reshape(-1)
        if not np.shares_memory(flat, theta):
            raise ConfigError(f"{name}: parameter must be contiguous to be perturbed in place")
        worst = 0.0
        checked = skipped = 0
        for idx in _select_entries(grad, max_entries):
            original = flat[idx]
            flat[idx] = original + eps
            plus = loss_fn()
            crossed = base_pattern is not None and not _same_pattern(base_pattern, pattern_fn())
            flat[idx] = original - eps
            minus = loss_fn()
            crossed = crossed or (base_pattern is not None and not _same_pattern(base_pattern, pattern_fn()))
            flat[idx] = original
            if not (math.isfinite(plus) and math.isfinite(minus)):
                raise NumericError(f"non-finite loss while perturbing {name}[{idx}]", parameter=name)
            if crossed:
                skipped += 1
                continue
            numeric = (plus - minus) / (2 * eps)
            worst = max(worst, float(relative_error(grad.reshape(-1)[idx], numeric)))
            checked += 1
        report.parameters.append(
            ParameterCheck(name=name, max_rel_error=worst, entries_checked=checked, entries_skipped=skipped)
        )
    return report


def activation_pattern(network: Network) -> Pattern:
    """ReLU masks and pooling winners cached by the last TRAIN-mode forward pass."""
    pattern: Pattern = []
    for layer in network.layers:
        if isinstance(layer, ReLU):
            pattern.append(layer.state.cache["mask"])
        elif isinstance(layer, MaxPool2):
            pattern.append(layer.state.cache["argmax"])
    return pattern


def gradient_check(
    network: Network,
    x: Tensor,
    label: int,
    eps: float = 1e-5,
    max_entries: int | None = None,
    skip_kinks: bool = True,
) -> GradientCheckReport:
    """Gradient check of a whole network on one labelled sample.

    The network must run in f64; dropout is disabled for the duration.
    `max_entries` limits the entries checked per parameter tensor. With
    `skip_kinks`, entries whose perturbation crosses a ReLU kink or flips a
    pooling winner are skipped.

    Raises:
        ConfigError: If the network is not f64.
        NumericError: If the loss is non-finite.
    """
    if network.precision is not Precision.F64:
        raise ConfigError("gradient checks need an f64 network")

    with network.dropout_disabled():
        logits = network.forward(x, Mode.TRAIN)
        loss, _, dlogits = softmax_xent(logits, label)
        if not math.isfinite(loss):
            raise NumericError("non-finite loss at the unperturbed parameters")
        network.backward(dlogits)
        analytic = {name: g.copy() for name, g in network.gradients().items()}

        def loss_fn() -> float:
            # TRAIN mode only to fill the caches the pattern is read from; dropout is off
            return softmax_xent(network.forward(x, Mode.TRAIN), label)[0]

        return compare_gradients(
            loss_fn,
            network.parameters(),
            analytic,
            eps,
            max_entries,
            pattern_fn=(lambda: activation_pattern(network)) if skip_kinks else None,
        )
