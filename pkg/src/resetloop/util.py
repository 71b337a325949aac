"""Small shared helpers."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

THREADS_ENV = "RESETLOOP_THREADS"


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(fn, items: list) -> list:
    """Order-preserving map; results independent of evaluation order.

    Runs on a thread pool when RESETLOOP_THREADS > 1, serially otherwise.
    """
    n = thread_count()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def log_grid(omega_min: float, omega_max: float, points_per_decade: int) -> np.ndarray:
    """Logarithmic frequency grid with at least two points."""
    if omega_min <= 0 or omega_max <= omega_min:
        raise ValueError(f"need 0 < omega_min < omega_max, got ({omega_min}, {omega_max})")
    decades = np.log10(omega_max / omega_min)
    n = max(2, int(round(decades * points_per_decade)) + 1)
    return np.geomspace(omega_min, omega_max, n)
