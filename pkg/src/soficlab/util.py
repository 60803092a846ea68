"""Deterministic seeding and sampling helpers.

Sampled statistics are drawn in fixed-size chunks; the RNG of chunk i is
derived from (seed, salt, i) alone, so results are byte-identical however
the chunks are scheduled.  SOFICLAB_THREADS caps the worker count
(default: all cores).
"""

from __future__ import annotations

import hashlib
import os
import random
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List

_MASK64 = (1 << 64) - 1
CHUNK = 8192


def mix64(seed: int, salt: int) -> int:
    return (seed * 0x9E3779B97F4A7C15 + salt * 0xBF58476D1CE4E5B9
            + 0x94D049BB133111EB) & _MASK64


def text_salt(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


def chunk_rng(seed: int, salt: int, index: int) -> random.Random:
    return random.Random(mix64(mix64(seed, salt), index))


def worker_count() -> int:
    env = os.environ.get("SOFICLAB_THREADS")
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise ValueError(f"SOFICLAB_THREADS must be an integer, got {env!r}")
        if cap < 1:
            raise ValueError("SOFICLAB_THREADS must be >= 1")
        return cap
    return os.cpu_count() or 1


def run_chunks(total: int, seed: int, salt: int, task: Callable) -> List:
    """task(rng, count) per chunk; returns the list of chunk results in order."""
    sizes = [CHUNK] * (total // CHUNK)
    if total % CHUNK:
        sizes.append(total % CHUNK)
    jobs = [(chunk_rng(seed, salt, i), size) for i, size in enumerate(sizes)]
    workers = min(worker_count(), len(jobs)) or 1
    if workers == 1:
        return [task(rng, size) for rng, size in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: task(*job), jobs))
