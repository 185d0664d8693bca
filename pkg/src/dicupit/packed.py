"""Bit-packed fixed-width slot storage over uint64 words.

Slots are packed back to back with no padding, so the allocated bit count of a
plane equals slots * width exactly; that is what makes the reported memory
figures honest. A slot of width w <= 64 may straddle one word boundary.
"""

from __future__ import annotations

import numpy as np

_M64 = (1 << 64) - 1


class SlotPlane:
    """num_slots fixed-width values packed into a uint64 word array."""

    __slots__ = ("num_slots", "width", "mask", "words")

    def __init__(self, num_slots: int, width: int):
        if not (1 <= width <= 64):
            raise ValueError("slot width must be in [1, 64]")
        self.num_slots = num_slots
        self.width = width
        self.mask = (1 << width) - 1
        nbits = num_slots * width
        self.words = np.zeros((nbits + 63) // 64 + 1, dtype=np.uint64)
        # one spare word so straddling reads never bounds-check

    def read(self, slot: int) -> int:
        pos = slot * self.width
        w = pos >> 6
        off = pos & 63
        v = int(self.words[w]) >> off
        if off + self.width > 64:
            v |= int(self.words[w + 1]) << (64 - off)
        return v & self.mask

    def write(self, slot: int, value: int) -> None:
        pos = slot * self.width
        w = pos >> 6
        off = pos & 63
        lo = int(self.words[w])
        lo &= ~(self.mask << off) & _M64
        lo |= (value << off) & _M64
        self.words[w] = lo
        if off + self.width > 64:
            hi = int(self.words[w + 1])
            spill = self.width - (64 - off)
            hi &= ~((1 << spill) - 1)
            hi |= value >> (64 - off)
            self.words[w + 1] = hi

    def read_all(self) -> np.ndarray:
        """Vectorized read of every slot (used by expiry sweeps)."""
        idx = np.arange(self.num_slots, dtype=np.int64)
        pos = idx * self.width
        w = pos >> 6
        off = (pos & 63).astype(np.uint64)
        lo = self.words[w] >> off
        shift = (np.uint64(64) - off) & np.uint64(63)
        hi = np.where(off > 0, self.words[w + 1] << shift, np.uint64(0))
        need_hi = (off.astype(np.int64) + self.width) > 64
        v = np.where(need_hi, lo | hi, lo)
        return v & np.uint64(self.mask)

    def clear(self) -> None:
        self.words[:] = 0

    @property
    def bits(self) -> int:
        return self.num_slots * self.width
