"""Deterministic parallel mapping over seeded work items."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor


def ordered_map(fn, items, workers: int = 1):
    """Map fn over items, optionally across processes, preserving order.

    Results are merged in item order, so output is independent of the
    worker count as long as fn is a pure function of its item.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))
