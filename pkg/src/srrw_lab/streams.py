"""Reproducible per-replica random streams.

Every Monte Carlo routine in the package takes a ``(master_seed, stream
index)`` pair instead of a shared generator, so replicas can be scheduled
in any order (or split across threads) without changing the results.
"""

from __future__ import annotations

import numpy as np


def stream(master_seed: int, index: int = 0) -> np.random.Generator:
    """Return the generator for stream ``index`` derived from ``master_seed``.

    Streams with different indices are statistically independent, and the
    mapping (seed, index) -> byte stream is stable across processes and
    platforms.
    """
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.PCG64(ss))


def chunk_ranges(total: int, chunk: int):
    """Split ``range(total)`` into consecutive (start, stop) chunks.

    Chunk boundaries depend only on (total, chunk), never on thread count,
    which is what makes parallel reductions deterministic.
    """
    if total < 0:
        raise ValueError("total must be >= 0")
    if chunk <= 0:
        raise ValueError("chunk must be positive")
    out = []
    start = 0
    while start < total:
        stop = min(start + chunk, total)
        out.append((start, stop))
        start = stop
    return out
