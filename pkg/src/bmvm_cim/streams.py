"""Deterministic per-task random streams and an order-preserving process map."""

from __future__ import annotations

import zlib
from concurrent.futures import ProcessPoolExecutor

import numpy as np


def rng_for(master_seed: int, label: str, *index: int) -> np.random.Generator:
    """Independent generator for one unit of work, keyed by ``(master_seed, label, index)``."""
    key = (zlib.crc32(label.encode()),) + tuple(int(i) for i in index)
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=key))


def parallel_map(fn, items, jobs: int = 1):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))
