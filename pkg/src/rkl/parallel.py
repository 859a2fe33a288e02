"""Thread-capped map for independent experiment cells.

RKL_THREADS (positive integer) caps the worker count; default is the machine
parallelism.  Results are returned in input order, so outputs never depend on
the schedule.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

from .errors import ConfigError


def thread_count():
    val = os.environ.get("RKL_THREADS")
    if val is None:
        return os.cpu_count() or 1
    try:
        n = int(val)
    except ValueError as exc:
        raise ConfigError(f"RKL_THREADS must be a positive integer, got {val!r}") from exc
    if n < 1:
        raise ConfigError(f"RKL_THREADS must be a positive integer, got {val!r}")
    return n


def ordered_map(fn, items):
    items = list(items)
    n = min(thread_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
