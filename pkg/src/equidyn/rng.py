"""Deterministic random substreams and an order-preserving parallel map.

Every sampling loop derives its generator from (master seed, index path)
through SeedSequence spawn keys feeding a counter-based Philox stream, so
results never depend on how many workers ran the loop or in which order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
U = TypeVar("U")


def substream(seed: int, *path: int) -> np.random.Generator:
    """Generator for the substream addressed by `path` under `seed`."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *path: int) -> int:
    """Stable child seed for handing to an operation that wants its own seed."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, np.uint64)[0])


def pmap(fn: Callable[[T], U], items: Iterable[T], threads: int = 1) -> list[U]:
    """map() that may fan out over threads; output order matches input order."""
    seq: Sequence[T] = list(items)
    if threads > 1 and len(seq) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, seq))
    return [fn(item) for item in seq]
