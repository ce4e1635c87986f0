"""Worker-count resolution and order-preserving concurrent mapping.

The OMNI_THREADS environment variable caps the worker count (0 or unset
means auto-detect). Results are always merged in input order and every
task is a pure function, so the degree of parallelism can never change
an output.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def worker_count() -> int:
    """Resolve the worker cap from OMNI_THREADS (0 = auto).

    Auto stays single-worker on boxes with <= 2 cores, where the BLAS
    already saturates the hardware and extra fold workers only contend.
    """
    raw = os.environ.get("OMNI_THREADS", "0").strip() or "0"
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"OMNI_THREADS must be an integer, got {raw!r}") from None
    if value < 0:
        raise ValueError(f"OMNI_THREADS must be >= 0, got {value}")
    if value == 0:
        cores = os.cpu_count() or 1
        return 1 if cores <= 2 else cores
    return value


def ordered_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Apply fn to every item, possibly in threads, preserving input order."""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
