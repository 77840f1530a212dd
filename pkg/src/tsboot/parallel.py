"""Index-ordered fan-out over a process pool.

Results come back in input order whatever the worker count, and every task
draws from its own derived stream, so output never depends on ``workers``.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "TSBOOT_THREADS"


def default_workers() -> int:
    return os.cpu_count() or 1


def resolve_workers(cli_value: int | None = None) -> int:
    """TSBOOT_THREADS overrides the command-line value, which overrides the machine default."""
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    elif cli_value is not None:
        value = cli_value
    else:
        value = default_workers()
    if value < 1:
        raise ValueError(f"worker count must be >= 1, got {value}")
    return value


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> list[R]:
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))
