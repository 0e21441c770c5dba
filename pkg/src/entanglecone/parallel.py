"""Optional thread parallelism for independent restart batches.

The ENTANGLECONE_THREADS environment variable caps the worker count;
zero or unset means serial execution. Work items are pure functions of
their index, results are collected in index order, and every stochastic
item owns a stream derived from its index, so the outcome is identical
whatever the thread count.
"""
from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor

logger = logging.getLogger(__name__)

_ENV_VAR = "ENTANGLECONE_THREADS"


def worker_count() -> int:
    raw = os.environ.get(_ENV_VAR, "0")
    try:
        value = int(raw)
    except ValueError:
        logger.warning("ignoring non-integer %s=%r", _ENV_VAR, raw)
        return 0
    return max(0, value)


def run_indexed(fn, count: int) -> list:
    """Evaluate fn(0..count-1), possibly on threads, in index order."""
    workers = worker_count()
    if workers <= 0 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=min(workers, count)) as pool:
        return list(pool.map(fn, range(count)))
