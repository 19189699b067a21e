"""
Worker-pool sizing and an order-preserving parallel map.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "SELFREG_THREADS"


def max_workers() -> int:
    """Worker cap from ``SELFREG_THREADS`` (default ``min(8, cpu_count)``)."""
    default = min(8, os.cpu_count() or 1)
    raw = os.environ.get(THREADS_ENV)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning("[WORKERS] Ignoring non-integer %s=%r", THREADS_ENV, raw)
        return default
    return max(1, value)


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
    """
    Apply ``fn`` to every item and return the results in input order.

    Runs sequentially when only one worker is allowed or there is at most one item.
    """
    items = list(items)
    workers = max_workers() if workers is None else max(1, workers)
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
