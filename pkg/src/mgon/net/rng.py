"""Seedable, splittable random streams.

Each consumer derives its own stream from ``(master seed, *keys)`` so that
adding a draw in one place never shifts the numbers seen elsewhere.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key(k: object) -> int:
    if isinstance(k, (int, np.integer)):
        return int(k) & 0xFFFFFFFF
    return zlib.crc32(str(k).encode())


def make_rng(seed: int, *keys: object) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=tuple(_key(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def trial_seeds(master: int, n: int) -> list[int]:
    """Independent integer seeds for ``n`` trials."""
    ss = np.random.SeedSequence(master)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in ss.spawn(n)]
