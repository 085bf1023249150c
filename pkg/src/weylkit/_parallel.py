"""Order-preserving parallel map with an environment-variable thread cap.

WEYLKIT_THREADS limits the worker count; unset or <= 0 means one worker per
CPU (capped at 8). Grid points are independent, so results never depend on
the thread count, only wall time does.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

_ENV_VAR = "WEYLKIT_THREADS"


def thread_count() -> int:
    raw = os.environ.get(_ENV_VAR, "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = min(os.cpu_count() or 1, 8)
    return n


def parallel_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    work: Sequence[T] = list(items)
    n = thread_count()
    if n == 1 or len(work) <= 1:
        return [fn(x) for x in work]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, work))
