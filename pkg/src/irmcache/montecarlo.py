"""Monte Carlo counterparts of the exact results.

Random streams come from numpy's ``PCG64`` bit generator seeded with the
caller's integer, so a fixed seed reproduces the same estimate on any
platform.  Items are drawn by inverse transform on the cumulative table.
"""
from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from irmcache.popularity import Popularity

__all__ = ["SimEstimate", "LRUCache", "simulate_lru", "simulate_ccp"]

_CHUNK = 1 << 16


@dataclass(frozen=True)
class SimEstimate:
    mean: float
    std_error: float
    samples: int
    seed: int


class LRUCache:
    """Fully associative LRU cache holding at most ``capacity`` items."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._entries: OrderedDict[int, None] = OrderedDict()
        self.evictions = 0

    def access(self, item: int) -> bool:
        """Reference ``item``; return True on a hit."""
        entries = self._entries
        if item in entries:
            entries.move_to_end(item)
            return True
        entries[item] = None
        if len(entries) > self.capacity:
            entries.popitem(last=False)
            self.evictions += 1
        return False

    def __len__(self):
        return len(self._entries)

    def __contains__(self, item):
        return item in self._entries

    def recency(self) -> list[int]:
        """Resident items, most recently used first."""
        return list(reversed(self._entries))


def _draws(pop: Popularity, rng: np.random.Generator):
    cdf = np.cumsum(pop.probs)
    cdf[-1] = 1.0
    while True:
        u = rng.random(_CHUNK)
        yield from np.searchsorted(cdf, u, side="right").tolist()


def simulate_lru(
    pop: Popularity,
    capacity: int,
    accesses: int,
    seed: int,
    warmup: int | None = None,
    batches: int = 50,
) -> SimEstimate:
    """Estimate the steady-state miss rate of an LRU cache by simulation.

    Parameters
    ----------
    pop : Popularity
    capacity : int
        Cache size, ``1 <= capacity <= m``.
    accesses : int
        Number of measured accesses after warmup, at least 1000.
    seed : int
    warmup : int, optional
        Minimum number of unmeasured accesses; defaults to ``10 * m``.
        Warmup also continues until the first eviction (or, when
        ``capacity == m``, until the cache is full).
    batches : int
        Number of batch means used for the standard error (at least 30).
    """
    m = pop.m
    if not 1 <= capacity <= m:
        raise ValueError(f"capacity must be in [1, {m}], got {capacity}")
    if accesses < 1000:
        raise ValueError("need at least 1000 measured accesses")
    if batches < 30:
        raise ValueError("need at least 30 batches")
    if warmup is None:
        warmup = 10 * m

    rng = np.random.Generator(np.random.PCG64(seed))
    stream = _draws(pop, rng)
    cache = LRUCache(capacity)
    done = 0
    while done < warmup or not (cache.evictions or len(cache) == m):
        cache.access(next(stream))
        done += 1

    misses = np.empty(accesses, dtype=np.int8)
    for t in range(accesses):
        misses[t] = not cache.access(next(stream))
    means = np.array([b.mean() for b in np.array_split(misses, batches)])
    return SimEstimate(
        mean=float(misses.mean()),
        std_error=float(means.std(ddof=1) / math.sqrt(batches)),
        samples=accesses,
        seed=seed,
    )


def simulate_ccp(pop: Popularity, j: int, trials: int, seed: int) -> SimEstimate:
    """Estimate ``E{C_j}`` by repeatedly drawing until ``j`` distinct items appear."""
    m = pop.m
    if not 1 <= j <= m:
        raise ValueError(f"collection size must be in [1, {m}], got {j}")
    if trials < 1000:
        raise ValueError("need at least 1000 trials")
    rng = np.random.Generator(np.random.PCG64(seed))
    stream = _draws(pop, rng)
    counts = np.empty(trials)
    for t in range(trials):
        seen = set()
        n = 0
        while len(seen) < j:
            seen.add(next(stream))
            n += 1
        counts[t] = n
    return SimEstimate(
        mean=float(counts.mean()),
        std_error=float(counts.std(ddof=1) / math.sqrt(trials)),
        samples=trials,
        seed=seed,
    )
