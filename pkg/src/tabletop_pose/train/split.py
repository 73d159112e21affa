"""Stratified train/validation split."""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from typing import Callable, Hashable, Sequence, TypeVar

import numpy as np

from tabletop_pose.errors import ConfigError

logger = logging.getLogger(__name__)

T = TypeVar("T")


def _object_and_angle(item) -> Hashable:
    return (item.object, item.angle_class)


def val_count(n: int, val_fraction: float) -> int:
    """Validation share of a stratum of n >= 2: round-half-up, kept in [1, n-1]."""
    return min(max(math.floor(n * val_fraction + 0.5), 1), n - 1)


def split_train_val(
    items: Sequence[T],
    val_fraction: float,
    seed: int,
    *,
    stratum: Callable[[T], Hashable] = _object_and_angle,
    group: Callable[[T], Hashable] | None = None,
    strict: bool = True,
) -> tuple[list[T], list[T]]:
    """Split items into disjoint, exhaustive train and validation lists.

    Items are stratified by `stratum` (object and angle class by default) and
    each stratum contributes `val_count(n, val_fraction)` members to validation.
    When `group` is given, items sharing a group key move together and strata
    are counted in groups; the stratum of a group is that of its first item.
    Both outputs keep the input order. The choice is a pure function of the
    items, the fraction and the seed.

    Args:
        items: Samples (or anything `stratum` understands).
        val_fraction: Share of each stratum sent to validation, in (0, 1).
        seed: Seed for the per-stratum permutations.
        stratum: Key function defining the strata.
        group: Optional key function for items that must not be separated.
        strict: If False, strata with fewer than two groups stay in train
            with a warning instead of raising.

    Raises:
        ConfigError: If a stratum has fewer than two members and strict is set.
    """
    if not 0.0 < val_fraction < 1.0:
        raise ConfigError(f"val_fraction must be in (0, 1), got {val_fraction}")

    group_of = group if group is not None else (lambda item: None)
    groups: dict[Hashable, list[int]] = {}
    strata: dict[Hashable, list[Hashable]] = defaultdict(list)
    for index, item in enumerate(items):
        key = (index,) if group is None else ("g", group_of(item))
        if key not in groups:
            groups[key] = []
            strata[stratum(item)].append(key)
        groups[key].append(index)

    rng = np.random.default_rng(seed)
    val_indices: set[int] = set()
    for stratum_key in sorted(strata, key=repr):
        members = strata[stratum_key]
        if len(members) < 2:
            message = f"stratum {stratum_key!r} has {len(members)} member(s); need at least 2 to split"
            if strict:
                raise ConfigError(message)
            logger.warning(f"{message}, keeping it in train")
            continue
        chosen = rng.permutation(len(members))[: val_count(len(members), val_fraction)]
        for position in chosen:
            val_indices.update(groups[members[position]])

    train = [item for i, item in enumerate(items) if i not in val_indices]
    val = [item for i, item in enumerate(items) if i in val_indices]
    return train, val
