"""Compensated accumulation and deterministic chunked reduction.

Every long sum in the package goes through Neumaier's variant of Kahan
summation.  Ranges are cut on a fixed chunk grid that does not depend on the
worker count, and per-chunk partials are merged in chunk order, so results are
bit-identical for any number of workers.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

from numba import njit

CHUNK = 1 << 20

T = TypeVar("T")


@njit(inline="always")
def nadd(s, c, x):
    t = s + x
    if abs(s) >= abs(x):
        c += (s - t) + x
    else:
        c += (x - t) + s
    return t, c


def merge(partials: Sequence[tuple[float, float]]) -> float:
    """Merge ``(sum, compensation)`` pairs in order."""
    s = 0.0
    c = 0.0
    for ps, pc in partials:
        for x in (ps, pc):
            t = s + x
            if abs(s) >= abs(x):
                c += (s - t) + x
            else:
                c += (x - t) + s
            s = t
    return s + c


def chunk_bounds(lo: int, hi: int, chunk: int = CHUNK) -> list[tuple[int, int]]:
    """Half-open chunks covering ``[lo, hi)`` on a grid anchored at ``lo``."""
    return [(a, min(a + chunk, hi)) for a in range(lo, hi, chunk)]


def map_ordered(fn: Callable[..., T], jobs: Sequence[tuple], workers: int = 1) -> list[T]:
    """Apply ``fn(*job)`` to each job, returning results in job order.

    Kernels called through here release the GIL, so threads give real
    parallelism without copying tables between processes.
    """
    if workers <= 1 or len(jobs) <= 1:
        return [fn(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))
