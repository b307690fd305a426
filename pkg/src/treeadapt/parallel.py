"""Fork-based process pool for independent, seeded runs.

Shared read-only inputs are placed in a module global before the pool forks,
so workers inherit them (and any compiled kernels) without pickling.
Results come back in input order regardless of the worker count.
"""

from __future__ import annotations

import multiprocessing as mp
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Sequence

_SHARED: dict[str, Any] = {}


def _call_batch(fn, batch):
    return [fn(_SHARED, item) for item in batch]


def run_parallel(fn: Callable[[dict, Any], Any], items: Sequence, shared: dict, workers: int = 1) -> list:
    """``[fn(shared, item) for item in items]``, spread over ``workers`` forked processes.

    ``fn`` must be a module-level function. The first item is evaluated in the
    parent before forking so JIT compilation happens once.
    """
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(shared, item) for item in items]
    _SHARED.clear()
    _SHARED.update(shared)
    try:
        first = fn(_SHARED, items[0])
        rest = items[1:]
        workers = min(workers, len(rest))
        batches = [rest[w::workers] for w in range(workers)]
        with ProcessPoolExecutor(max_workers=workers, mp_context=mp.get_context("fork")) as pool:
            done = list(pool.map(_call_batch, [fn] * workers, batches))
    finally:
        _SHARED.clear()
    out = [None] * len(rest)
    for w, results in enumerate(done):
        out[w::workers] = results
    return [first, *out]
