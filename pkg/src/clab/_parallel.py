from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np


def map_rows(fn, *arrays, threads: int = 1):
    """Apply an elementwise ``fn`` to row blocks of ``arrays`` and stitch.

    ``fn`` must be elementwise in its inputs; the output is then identical for
    any thread count.
    """
    n = len(arrays[0])
    if threads <= 1 or n < 2:
        return fn(*arrays)
    bounds = np.linspace(0, n, min(threads, n) + 1).astype(int)
    blocks = [tuple(a[lo:hi] for a in arrays) for lo, hi in zip(bounds[:-1], bounds[1:])]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda b: fn(*b), blocks))
    if isinstance(parts[0], tuple):
        return tuple(np.concatenate(p) for p in zip(*parts))
    return np.concatenate(parts)
