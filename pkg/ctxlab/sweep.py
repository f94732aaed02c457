#!/usr/bin/env python3
"""
Partitioned execution of independent work items on a thread pool.
Results come back in submission order, so reductions are deterministic
whatever the worker count.
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Callable, List, Sequence, TypeVar

from .error_handling import ArgumentError

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class Chunk:
    """Half-open index range [start, stop) handled by one task."""
    index: int
    start: int
    stop: int

    @property
    def size(self) -> int:
        return self.stop - self.start


def partition(total: int, chunk_size: int) -> List[Chunk]:
    """
    Split ``range(total)`` into consecutive chunks of at most ``chunk_size``.

    Args:
        total: Number of items
        chunk_size: Maximum items per chunk (>= 1)

    Returns:
        Chunks covering the range exactly once, in order
    """
    if chunk_size < 1:
        raise ArgumentError(f"chunk_size must be >= 1, got {chunk_size}")
    return [
        Chunk(k, start, min(start + chunk_size, total))
        for k, start in enumerate(range(0, total, chunk_size))
    ]


def run_partitioned(func: Callable[[T], R], items: Sequence[T], workers: int = 1) -> List[R]:
    """
    Apply ``func`` to every item, optionally in parallel.

    Args:
        func: Pure function of one item
        items: Work items
        workers: Thread-pool size; 1 runs inline

    Returns:
        Results in the order of ``items``
    """
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    results: List[R] = [None] * len(items)  # type: ignore[list-item]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {executor.submit(func, item): i for i, item in enumerate(items)}
        done = 0
        for future in as_completed(futures):
            i = futures[future]
            results[i] = future.result()
            done += 1
            logger.debug(f"Completed {done}/{len(items)} work items")
    return results
