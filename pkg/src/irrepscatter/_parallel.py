"""Tiny helper for order-preserving thread pools honouring IRREP_SCATTER_THREADS."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_VAR = "IRREP_SCATTER_THREADS"


def worker_count(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    raw = os.environ.get(ENV_VAR, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return max(1, min(8, os.cpu_count() or 1))


def map_ordered(fn, items, workers: int | None = None) -> list:
    """``[fn(x) for x in items]``, possibly on a thread pool; order is preserved."""
    items = list(items)
    n = worker_count(workers)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
