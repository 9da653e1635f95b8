"""Order-preserving map over a process pool, capped by ``CDT_THREADS``."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def worker_count(n_items: int) -> int:
    cap = os.environ.get("CDT_THREADS")
    workers = os.cpu_count() or 1
    if cap:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError:
            raise ValueError(f"CDT_THREADS must be an integer, got {cap!r}") from None
    return max(1, min(workers, n_items))


def parallel_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """``[fn(x) for x in items]``; results are in input order regardless of workers.

    ``fn`` must be picklable when more than one worker is used.
    """
    items = list(items)
    workers = worker_count(len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
