"""Counting Bloom filter (4-bit counters) and the standard FPP formula.

The PIT must delete entries, so the per-interface filters are counting
variants; 4-bit counters saturate at 15 and become sticky (a saturated
counter is never decremented, the classic guard against underflow).

Queries always evaluate all num_hashes positions. A short-circuit would be
marginally faster but would break the fixed cost-per-consultation accounting
that the benchmark counters assert (and that the lookup comparison is built
on): every insert/query/remove costs exactly num_hashes invocations.
"""

from __future__ import annotations

import math

import numpy as np

from .hashing import DEFAULT_SEED, MASK64, HashCounter, mix64


def bloom_fpp(n: int, m: int, k_h: int) -> float:
    """False-positive probability (1 - e^(-k*n/m))^k of a Bloom filter with
    n items, m cells, and k_h hash functions."""
    if m <= 0:
        raise ValueError("bit count m must be positive")
    if k_h < 1:
        raise ValueError("need at least one hash function")
    if n < 0:
        raise ValueError("item count cannot be negative")
    return (1.0 - math.exp(-k_h * n / m)) ** k_h


def bloom_m_for_fpp(n: int, k_h: int, target: float) -> int:
    """Cells needed to keep the FPP at `target` with n items and k_h hashes:
    m = -n*k_h / ln(1 - target^(1/k_h)), rounded up."""
    if not (0.0 < target < 1.0):
        raise ValueError("target FPP must be in (0, 1)")
    return math.ceil(-n * k_h / math.log(1.0 - target ** (1.0 / k_h)))


class CountingBloomFilter:
    """Nibble-packed counting Bloom filter.

    May view one row of a shared (rows, bytes) array so that a group of
    filters (the per-interface set plus the shared one) stays kernel-friendly.
    """

    def __init__(self, m: int, num_hashes: int = 5, seed: int = DEFAULT_SEED,
                 counter: HashCounter | None = None, nibbles: np.ndarray | None = None,
                 row: int = 0):
        if m <= 0:
            raise ValueError("bit count m must be positive")
        self.m = m
        self.num_hashes = num_hashes
        self.seed = seed & MASK64
        self.counter = counter if counter is not None else HashCounter()
        self.nibbles = nibbles if nibbles is not None else np.zeros((1, (m + 1) // 2), dtype=np.uint8)
        self.row = row
        self.item_count = 0
        self.consultations = 0

    def _indices(self, name: str):
        # one invocation per hash function, seeded per (row, function)
        data = name.encode("utf-8")
        self.counter.add(self.num_hashes)
        self.consultations += 1
        base = (self.seed + self.row * 256) & MASK64
        return [mix64(data, (base + j) & MASK64) % self.m for j in range(self.num_hashes)]

    def _get(self, idx: int) -> int:
        return (int(self.nibbles[self.row, idx >> 1]) >> ((idx & 1) * 4)) & 0xF

    def _set(self, idx: int, value: int) -> None:
        byte = idx >> 1
        shift = (idx & 1) * 4
        cur = int(self.nibbles[self.row, byte])
        self.nibbles[self.row, byte] = (cur & (0xFF ^ (0xF << shift))) | (value << shift)

    def insert(self, name: str) -> None:
        for idx in self._indices(name):
            c = self._get(idx)
            if c < 15:
                self._set(idx, c + 1)
        self.item_count += 1

    def query(self, name: str) -> bool:
        ok = True
        for idx in self._indices(name):
            if self._get(idx) == 0:
                ok = False
        return ok

    def remove(self, name: str) -> bool:
        """Decrement the name's counters if it queries present; absent names
        are left untouched. Indices are reused, so a remove costs the same
        num_hashes invocations as any other consultation."""
        indices = self._indices(name)
        if any(self._get(idx) == 0 for idx in indices):
            return False
        for idx in indices:
            c = self._get(idx)
            if c < 15:
                self._set(idx, c - 1)
        self.item_count -= 1
        return True

    def memory_bits(self) -> int:
        return 4 * self.m

    def fpp_now(self) -> float:
        return bloom_fpp(self.item_count, self.m, self.num_hashes)
