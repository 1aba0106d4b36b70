"""Deterministic sharding helpers for range scans.

Shard results are merged in shard order, so output never depends on the
worker count.  Worker functions must be module-level (picklable).
"""

from __future__ import annotations

import multiprocessing
import os
from typing import Callable, Sequence

WORKERS_ENV = "COLLATZKIT_WORKERS"


def default_workers() -> int:
    """Worker count from the environment, defaulting to 1."""
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def split_range(lo: int, hi: int, parts: int) -> list[tuple[int, int]]:
    """Split the inclusive range [lo..hi] into at most `parts` contiguous spans."""
    if hi < lo:
        return []
    n = hi - lo + 1
    parts = max(1, min(parts, n))
    base, extra = divmod(n, parts)
    spans = []
    start = lo
    for i in range(parts):
        size = base + (1 if i < extra else 0)
        spans.append((start, start + size - 1))
        start += size
    return spans


def run_sharded(fn: Callable, shards: Sequence, workers: int) -> list:
    """Apply fn to each shard, in-process or via a pool; results in shard order."""
    if workers <= 1 or len(shards) <= 1:
        return [fn(s) for s in shards]
    with multiprocessing.Pool(processes=min(workers, len(shards))) as pool:
        return pool.map(fn, shards)
