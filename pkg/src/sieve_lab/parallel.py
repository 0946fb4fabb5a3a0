"""Replicate fan-out over a process pool with index-ordered results."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, TypeVar

from .seeding import seed_derive

T = TypeVar("T")

WORKERS_ENV = "SIEVE_LAB_WORKERS"


def resolve_workers(workers: int | None = None) -> int:
    """Explicit count, else ``$SIEVE_LAB_WORKERS``, else 1."""
    if workers is None or workers <= 0:
        env = os.environ.get(WORKERS_ENV, "").strip()
        workers = int(env) if env else 1
    return max(1, workers)


def replicate_seeds(master: int, count: int) -> list[int]:
    return [seed_derive(master, i) for i in range(count)]


def map_ordered(fn: Callable[..., T], items: Iterable, workers: int | None = None) -> list[T]:
    """``[fn(item) for item in items]``, possibly on worker processes.

    ``fn`` must be picklable (module level or a ``functools.partial`` of one).
    Output order is input order whatever the worker count.
    """
    items = list(items)
    n = resolve_workers(workers)
    if n == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    chunk = max(1, len(items) // (4 * n))
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items, chunksize=chunk))
