"""The three comparison PITs behind the same packet-operation interface as
the distributed cuckoo PIT, plus an exact reference PIT.

* DiPIT: one counting Bloom filter per interface plus a shared filter that
  answers "is this name pending anywhere" (five hash invocations per filter
  consulted).
* Chain-hash PIT: 32-bit key digests with bucket chaining; a lookup applies
  the name hash twice (bucket and stored tag), the historical cost of this
  design.
* HT32: one centralized open-addressed table with linear probing; probe
  counts grow with load, which the benchmark surfaces.
* Oracle: an exact dict-backed PIT used as ground truth in replay diffs.
"""

from __future__ import annotations

import numpy as np

from .bloom import CountingBloomFilter, bloom_m_for_fpp
from .hashing import DEFAULT_SEED, MASK64, HashCounter, NameBlob, mix64
from .pit import (
    NO_MATCH,
    DataDecision,
    InterestDecision,
    _bits_of,
    tick_add,
    tick_expired,
    FAR_FUTURE_EXP,
)
from .backend import active_kernels

DIPIT_NUM_HASHES = 5  # headline value; 7 is a documented historical variant


class DipitPit:
    """Per-interface counting Bloom filters with a same-sized shared filter."""

    name = "dipit"

    def __init__(self, expected_per_iface: int, ports: int = 8,
                 num_hashes: int = DIPIT_NUM_HASHES, target_fpp: float = 0.01,
                 seed: int = DEFAULT_SEED, m: int | None = None, kernels=None):
        if m is None:
            m = bloom_m_for_fpp(max(1, expected_per_iface), num_hashes, target_fpp)
        self.m = m
        self.ports = ports
        self.num_hashes = num_hashes
        self.seed = seed & MASK64
        self.counter = HashCounter()
        self._kernels = kernels
        self.nibbles = np.zeros((ports + 1, (m + 1) // 2), dtype=np.uint8)
        self.per_iface = [CountingBloomFilter(m, num_hashes, seed, self.counter,
                                              self.nibbles, row=i)
                          for i in range(ports)]
        self.shared = CountingBloomFilter(m, num_hashes, seed, self.counter,
                                          self.nibbles, row=ports)
        self.n_aggregated = 0
        self.n_forwarded = 0
        self.n_no_match = 0

    @property
    def consultations(self) -> int:
        return sum(f.consultations for f in self.per_iface) + self.shared.consultations

    def on_interest(self, name: str, in_interface: int, now: int) -> InterestDecision:
        """Pending is decided by scanning every per-interface filter (the
        distributed design has no cheaper aggregate view; its central filter
        is interface-sized and only vets the data path)."""
        queries = [self.per_iface[i].query(name) for i in range(self.ports)]
        if not queries[in_interface]:
            self.per_iface[in_interface].insert(name)
        if any(queries):
            self.n_aggregated += 1
            return InterestDecision.AGGREGATED
        self.shared.insert(name)
        self.n_forwarded += 1
        return InterestDecision.FORWARD_TO_FIB

    def on_data(self, name: str, now: int) -> DataDecision:
        """Per-interface hits vetted by the central filter, which exists to
        suppress false matches coming out of the small interface filters."""
        hits = [i for i in range(self.ports) if self.per_iface[i].query(name)]
        if not hits or not self.shared.query(name):
            self.n_no_match += 1
            return NO_MATCH
        for i in hits:
            self.per_iface[i].remove(name)
        self.shared.remove(name)
        return DataDecision(frozenset(hits))

    def expire(self, now: int) -> int:
        # Bloom counters carry no timestamps; entries only leave on data
        return 0

    def pending_interfaces(self, name: str, now: int) -> frozenset:
        data = name.encode("utf-8")
        hits = set()
        for row in range(self.ports):
            base = (self.seed + row * 256) & MASK64
            if all(self._cell(row, mix64(data, (base + j) & MASK64) % self.m)
                   for j in range(self.num_hashes)):
                hits.add(row)
        return frozenset(hits)

    def _cell(self, row: int, idx: int) -> int:
        return (int(self.nibbles[row, idx >> 1]) >> ((idx & 1) * 4)) & 0xF

    def memory_bits(self) -> int:
        return (self.ports + 1) * 4 * self.m

    def occupancy(self) -> int:
        return self.shared.item_count

    def kernels(self):
        return self._kernels if self._kernels is not None else active_kernels()

    def preload(self, blob: NameBlob, lanes: np.ndarray, exp: int = 0,
                rng_seed: int = 0) -> int:
        self.kernels().bloom_insert_batch(
            self.nibbles, self.m, self.num_hashes, np.uint64(self.seed),
            blob.flat, blob.offsets, lanes, self.ports, self.counter.arr)
        self.shared.item_count += len(blob)
        return 0

    def lookup_batch(self, blob: NameBlob) -> np.ndarray:
        """Data-path probe: all per-interface filters are consulted."""
        out = np.empty(len(blob), dtype=np.uint8)
        self.kernels().bloom_lookup_batch(
            self.nibbles, self.m, self.num_hashes, np.uint64(self.seed),
            0, self.ports, blob.flat, blob.offsets, out, self.counter.arr)
        return out

    fp_probe_interest = lookup_batch

    def fp_probe_data(self, blob: NameBlob) -> np.ndarray:
        """Data-path probe: any per-interface hit, vetted by the central
        filter."""
        hits = self.lookup_batch(blob)
        vet = np.empty(len(blob), dtype=np.uint8)
        self.kernels().bloom_lookup_batch(
            self.nibbles, self.m, self.num_hashes, np.uint64(self.seed),
            self.ports, self.ports + 1, blob.flat, blob.offsets, vet, self.counter.arr)
        return hits & vet


class ChainHashPit:
    """Centralized PIT: 88-bit entries {key32, exp16, ifaces, next32} hanging
    off a bucket-head array. Insert and lookup each hash the name twice."""

    name = "chain"

    def __init__(self, capacity: int, num_heads: int, ports: int = 8,
                 seed: int = DEFAULT_SEED, lifetime_ticks: int = 1000, kernels=None):
        if num_heads & (num_heads - 1):
            raise ValueError("num_heads must be a power of two")
        self.capacity = capacity
        self.lifetime_ticks = lifetime_ticks
        self.ports = ports
        self.mask = num_heads - 1
        self.seed_a = seed & MASK64
        self.seed_b = (seed ^ 0xA5A5A5A5A5A5A5A5) & MASK64
        self.counter = HashCounter()
        self._kernels = kernels
        self.heads = np.zeros(num_heads, dtype=np.int32)
        self.key32 = np.zeros(capacity, dtype=np.uint32)
        self.exp16 = np.zeros(capacity, dtype=np.uint16)
        self.if16 = np.zeros(capacity, dtype=np.uint16)
        self.nxt = np.zeros(capacity, dtype=np.int32)
        self.meta = np.zeros(1, dtype=np.int64)  # allocation cursor
        self.free = []
        self.live = 0
        self.n_aggregated = 0
        self.n_forwarded = 0
        self.n_insert_failed = 0
        self.n_no_match = 0

    def _digests(self, name: str) -> tuple[int, int]:
        data = name.encode("utf-8")
        self.counter.add(2)
        return mix64(data, self.seed_a), mix64(data, self.seed_b)

    def _find(self, bucket: int, tag: int, now: int):
        """Walk the chain; returns (entry, prev) of the first live match."""
        prev = 0
        e = int(self.heads[bucket])
        while e:
            if int(self.key32[e - 1]) == tag and not tick_expired(int(self.exp16[e - 1]), now):
                return e, prev
            prev = e
            e = int(self.nxt[e - 1])
        return 0, 0

    def _alloc(self) -> int:
        if self.free:
            return self.free.pop()
        cursor = int(self.meta[0])
        if cursor >= self.capacity:
            return 0
        self.meta[0] = cursor + 1
        return cursor + 1

    def on_interest(self, name: str, in_interface: int, now: int) -> InterestDecision:
        da, db = self._digests(name)
        bucket = da & self.mask
        tag = db & 0xFFFFFFFF
        e, _ = self._find(bucket, tag, now)
        exp = tick_add(now, self.lifetime_ticks)
        if e:
            self.if16[e - 1] |= np.uint16(1 << in_interface)
            self.exp16[e - 1] = exp
            self.n_aggregated += 1
            return InterestDecision.AGGREGATED
        e = self._alloc()
        if not e:
            self.n_insert_failed += 1
            return InterestDecision.INSERT_FAILED
        self.key32[e - 1] = tag
        self.exp16[e - 1] = exp
        self.if16[e - 1] = 1 << in_interface
        self.nxt[e - 1] = self.heads[bucket]
        self.heads[bucket] = e
        self.live += 1
        self.n_forwarded += 1
        return InterestDecision.FORWARD_TO_FIB

    def _unlink(self, bucket: int, e: int, prev: int) -> None:
        if prev:
            self.nxt[prev - 1] = self.nxt[e - 1]
        else:
            self.heads[bucket] = self.nxt[e - 1]
        self.key32[e - 1] = 0
        self.if16[e - 1] = 0
        self.free.append(e)
        self.live -= 1

    def on_data(self, name: str, now: int) -> DataDecision:
        da, db = self._digests(name)
        bucket = da & self.mask
        e, prev = self._find(bucket, db & 0xFFFFFFFF, now)
        if not e:
            self.n_no_match += 1
            return NO_MATCH
        ifaces = frozenset(_bits_of(int(self.if16[e - 1])))
        self._unlink(bucket, e, prev)
        return DataDecision(ifaces)

    def expire(self, now: int) -> int:
        purged = 0
        for bucket in range(len(self.heads)):
            prev = 0
            e = int(self.heads[bucket])
            while e:
                nxt = int(self.nxt[e - 1])
                if tick_expired(int(self.exp16[e - 1]), now):
                    self._unlink(bucket, e, prev)
                    purged += 1
                else:
                    prev = e
                e = nxt
        return purged

    def pending_interfaces(self, name: str, now: int) -> frozenset:
        data = name.encode("utf-8")
        bucket = mix64(data, self.seed_a) & self.mask
        tag = mix64(data, self.seed_b) & 0xFFFFFFFF
        e, _ = self._find(bucket, tag, now)
        return frozenset(_bits_of(int(self.if16[e - 1]))) if e else frozenset()

    def memory_bits(self) -> int:
        iface_bits = max(8, self.ports)
        entry = 32 + 16 + iface_bits + 32
        return self.capacity * entry + len(self.heads) * 32

    def occupancy(self) -> int:
        return self.live

    def kernels(self):
        return self._kernels if self._kernels is not None else active_kernels()

    def preload(self, blob: NameBlob, lanes: np.ndarray, exp: int = FAR_FUTURE_EXP,
                rng_seed: int = 0) -> int:
        ok = np.zeros(len(blob), dtype=np.uint8)
        self.kernels().chain_insert_batch(
            self.heads, self.key32, self.exp16, self.if16, self.nxt, self.meta,
            self.mask, blob.flat, blob.offsets, lanes, exp,
            np.uint64(self.seed_a), np.uint64(self.seed_b), ok, self.counter.arr)
        stored = int(ok.sum())
        self.live += stored
        return len(blob) - stored

    def lookup_batch(self, blob: NameBlob) -> np.ndarray:
        out = np.empty(len(blob), dtype=np.uint8)
        self.kernels().chain_lookup_batch(
            self.heads, self.key32, self.nxt, self.mask, blob.flat, blob.offsets,
            np.uint64(self.seed_a), np.uint64(self.seed_b), out, self.counter.arr)
        return out

    fp_probe_interest = lookup_batch
    fp_probe_data = lookup_batch


class Ht32Pit:
    """Centralized open-addressed PIT (56-bit entries, linear probing with
    tombstones). One digest supplies both the start slot and the 32-bit tag."""

    name = "ht32"

    EMPTY, OCCUPIED, TOMBSTONE = 0, 1, 2

    def __init__(self, num_slots: int, ports: int = 8, seed: int = DEFAULT_SEED,
                 lifetime_ticks: int = 1000, kernels=None):
        if num_slots & (num_slots - 1):
            raise ValueError("num_slots must be a power of two")
        self.num_slots = num_slots
        self.lifetime_ticks = lifetime_ticks
        self.ports = ports
        self.mask = num_slots - 1
        self.seed = seed & MASK64
        self.counter = HashCounter()
        self._kernels = kernels
        self.key32 = np.zeros(num_slots, dtype=np.uint32)
        self.exp16 = np.zeros(num_slots, dtype=np.uint16)
        self.if16 = np.zeros(num_slots, dtype=np.uint16)
        self.state = np.zeros(num_slots, dtype=np.uint8)
        self.live = 0
        self.probe_count = 0
        self.n_aggregated = 0
        self.n_forwarded = 0
        self.n_insert_failed = 0
        self.n_no_match = 0

    def _digest(self, name: str) -> tuple[int, int]:
        d = mix64(name.encode("utf-8"), self.seed)
        self.counter.add(1)
        return d & self.mask, (d >> 32) & 0xFFFFFFFF

    def _probe_seq(self, pos: int, tag: int, now: int):
        """Returns (matching live slot or -1, first writable slot or -1)."""
        writable = -1
        for _ in range(self.num_slots):
            self.probe_count += 1
            st = int(self.state[pos])
            if st == self.EMPTY:
                return -1, (pos if writable < 0 else writable)
            if st == self.TOMBSTONE:
                if writable < 0:
                    writable = pos
            elif int(self.key32[pos]) == tag and not tick_expired(int(self.exp16[pos]), now):
                return pos, writable
            pos = (pos + 1) & self.mask
        return -1, writable

    def on_interest(self, name: str, in_interface: int, now: int) -> InterestDecision:
        pos0, tag = self._digest(name)
        hit, writable = self._probe_seq(pos0, tag, now)
        exp = tick_add(now, self.lifetime_ticks)
        if hit >= 0:
            self.if16[hit] |= np.uint16(1 << in_interface)
            self.exp16[hit] = exp
            self.n_aggregated += 1
            return InterestDecision.AGGREGATED
        if writable < 0:
            self.n_insert_failed += 1
            return InterestDecision.INSERT_FAILED
        self.state[writable] = self.OCCUPIED
        self.key32[writable] = tag
        self.exp16[writable] = exp
        self.if16[writable] = 1 << in_interface
        self.live += 1
        self.n_forwarded += 1
        return InterestDecision.FORWARD_TO_FIB

    def on_data(self, name: str, now: int) -> DataDecision:
        pos0, tag = self._digest(name)
        hit, _ = self._probe_seq(pos0, tag, now)
        if hit < 0:
            self.n_no_match += 1
            return NO_MATCH
        ifaces = frozenset(_bits_of(int(self.if16[hit])))
        self.state[hit] = self.TOMBSTONE
        self.if16[hit] = 0
        self.live -= 1
        return DataDecision(ifaces)

    def expire(self, now: int) -> int:
        occ = self.state == self.OCCUPIED
        exp = self.exp16.astype(np.int64)
        delta = (now - exp) & 0xFFFF
        dead = occ & (delta > 0) & (delta < 0x8000)
        idx = np.nonzero(dead)[0]
        self.state[idx] = self.TOMBSTONE
        self.if16[idx] = 0
        self.live -= len(idx)
        return len(idx)

    def pending_interfaces(self, name: str, now: int) -> frozenset:
        d = mix64(name.encode("utf-8"), self.seed)
        hit, _ = self._probe_seq(d & self.mask, (d >> 32) & 0xFFFFFFFF, now)
        return frozenset(_bits_of(int(self.if16[hit]))) if hit >= 0 else frozenset()

    def memory_bits(self) -> int:
        return self.num_slots * (32 + 16 + max(8, self.ports))

    def occupancy(self) -> int:
        return self.live

    def kernels(self):
        return self._kernels if self._kernels is not None else active_kernels()

    def preload(self, blob: NameBlob, lanes: np.ndarray, exp: int = FAR_FUTURE_EXP,
                rng_seed: int = 0) -> int:
        ok = np.zeros(len(blob), dtype=np.uint8)
        self.kernels().ht32_insert_batch(
            self.key32, self.exp16, self.if16, self.state, self.mask,
            blob.flat, blob.offsets, lanes, exp, np.uint64(self.seed), ok,
            self.counter.arr)
        stored = int(ok.sum())
        self.live += stored
        return len(blob) - stored

    def lookup_batch(self, blob: NameBlob) -> np.ndarray:
        out = np.empty(len(blob), dtype=np.uint8)
        self.kernels().ht32_lookup_batch(
            self.key32, self.state, self.mask, blob.flat, blob.offsets,
            np.uint64(self.seed), out, self.counter.arr)
        return out

    fp_probe_interest = lookup_batch
    fp_probe_data = lookup_batch


class OraclePit:
    """Exact reference PIT: name -> (expiration, interface set). No false
    positives by construction; used as ground truth in replay diffs."""

    name = "oracle"

    def __init__(self, ports: int = 8, lifetime_ticks: int = 1000):
        self.ports = ports
        self.lifetime_ticks = lifetime_ticks
        self.counter = HashCounter()
        self.table: dict[str, tuple[int, frozenset]] = {}
        self.n_aggregated = 0
        self.n_forwarded = 0
        self.n_no_match = 0

    def _live(self, name: str, now: int):
        entry = self.table.get(name)
        if entry is None or tick_expired(entry[0], now):
            return None
        return entry

    def on_interest(self, name: str, in_interface: int, now: int) -> InterestDecision:
        exp = tick_add(now, self.lifetime_ticks)
        entry = self._live(name, now)
        if entry is not None:
            self.table[name] = (exp, entry[1] | {in_interface})
            self.n_aggregated += 1
            return InterestDecision.AGGREGATED
        self.table[name] = (exp, frozenset((in_interface,)))
        self.n_forwarded += 1
        return InterestDecision.FORWARD_TO_FIB

    def on_data(self, name: str, now: int) -> DataDecision:
        entry = self._live(name, now)
        if entry is None:
            self.table.pop(name, None)
            self.n_no_match += 1
            return NO_MATCH
        del self.table[name]
        return DataDecision(entry[1])

    def expire(self, now: int) -> int:
        dead = [n for n, (exp, _) in self.table.items() if tick_expired(exp, now)]
        for n in dead:
            del self.table[n]
        return len(dead)

    def pending_interfaces(self, name: str, now: int) -> frozenset:
        entry = self._live(name, now)
        return entry[1] if entry is not None else frozenset()

    def memory_bits(self) -> int:
        iface_bits = max(8, self.ports)
        return sum(len(n.encode("utf-8")) * 8 + 16 + iface_bits for n in self.table)

    def occupancy(self) -> int:
        return len(self.table)

    def preload(self, blob: NameBlob, lanes: np.ndarray, exp: int = FAR_FUTURE_EXP,
                rng_seed: int = 0) -> int:
        for i in range(len(blob)):
            self.table[blob.name_at(i)] = (exp, frozenset((int(lanes[i]),)))
        return 0

    def lookup_batch(self, blob: NameBlob) -> np.ndarray:
        out = np.empty(len(blob), dtype=np.uint8)
        for i in range(len(blob)):
            out[i] = 1 if blob.name_at(i) in self.table else 0
        return out

    fp_probe_interest = lookup_batch
    fp_probe_data = lookup_batch
