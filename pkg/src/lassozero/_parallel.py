"""Thread-pool map that preserves input order.

The LP kernel releases the GIL, so independent solves scale across
threads. Results are collected by index, never by completion order, so
the output is identical for any worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def effective_threads(threads: int | None) -> int:
    if threads is None:
        return os.cpu_count() or 1
    return max(1, int(threads))


def thread_map(fn, items, threads: int | None = None) -> list:
    items = list(items)
    workers = min(effective_threads(threads), len(items)) if items else 1
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
