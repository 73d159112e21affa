"""Per-file fan-out over a process pool."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Callable, Sequence, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_workers(workers: int, total: int) -> int:
    """0 means one worker per CPU; never more workers than items."""
    if workers < 0:
        raise ValueError(f"workers must be >= 0, got {workers}")
    if workers == 0:
        workers = os.cpu_count() or 1
    return max(1, min(workers, total))


def run_all(fn: Callable[[T], R], items: Sequence[T], workers: int = 1) -> list[R]:
    """Apply `fn` to every item; results come back in completion order.

    With one worker everything runs in this process. Otherwise `fn` and the
    items must be picklable. The first worker exception is re-raised after the
    pool shuts down.
    """
    workers = resolve_workers(workers, len(items))
    if workers == 1:
        return [fn(item) for item in items]

    logger.debug(f"Fanning {len(items)} item(s) out to {workers} worker(s)")
    results: list[R] = []
    with ProcessPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(fn, item) for item in items]
        for future in as_completed(futures):
            results.append(future.result())
    return results
