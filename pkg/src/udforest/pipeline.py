"""Order-preserving parallel map for per-sentence jobs."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Iterator, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV_THREADS = "UDFOREST_THREADS"


def worker_count() -> int:
    """CPU count, capped by ``UDFOREST_THREADS`` when set."""
    n = os.cpu_count() or 1
    cap = os.environ.get(ENV_THREADS)
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ValueError(f"{ENV_THREADS} must be an integer, got {cap!r}") from None
    return n


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int | None = None,
                chunksize: int = 32) -> Iterator[R]:
    """Yield ``fn(item)`` in input order, whatever order workers finish in.

    Small inputs and single-worker runs stay in-process; ``fn`` must be
    picklable otherwise.
    """
    items = list(items)
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) <= 2 * chunksize:
        yield from map(fn, items)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(fn, items, chunksize=chunksize)
