"""Cuckoo filter with partial-key hashing, relocation, and deletion.

One table object can hold several independent "lanes" that share bucket
geometry and hash seeds; lane L of a multi-lane table behaves exactly like a
standalone filter, but the slots of all lanes belonging to one bucket index
are stored adjacently. A fan-out probe across every lane therefore touches two
contiguous bucket rows instead of scattering across separate tables. The
pending-interest layer builds its per-interface sub-tables as lanes of a
single such array.

Slots are bit-packed: a fingerprint plane at `fingerprint_bits` per slot and,
when requested, a payload plane (expiration and interface bits) alongside.
Fingerprint value 0 marks an empty slot; a raw digest of 0 is remapped to 1.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .backend import active_kernels
from .hashing import DEFAULT_SEED, P3, MASK64, NameHasher, NameBlob, mix64
from .packed import SlotPlane


def fpr_closed_form(fp_bits: int, bucket_slots: int, load: float) -> float:
    """Expected absent-key false-positive rate 1 - (1 - 2^-f)^(2*b*load)."""
    return 1.0 - (1.0 - 2.0 ** -fp_bits) ** (2.0 * bucket_slots * load)


@dataclass(frozen=True)
class FilterConfig:
    """Geometry and hashing parameters shared by a filter and its probes."""

    num_buckets: int
    bucket_slots: int = 4
    fingerprint_bits: int = 6
    max_kicks: int = 150
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        e = self.num_buckets
        if e < 1 or (e & (e - 1)) != 0:
            raise ValueError("num_buckets must be a power of two (XOR displacement must stay in range)")
        if self.bucket_slots < 1:
            raise ValueError("bucket_slots must be positive")
        if not (4 <= self.fingerprint_bits <= 16):
            raise ValueError("fingerprint_bits must be in [4, 16]")
        if self.max_kicks < 1:
            raise ValueError("max_kicks must be positive")

    @property
    def slots(self) -> int:
        return self.num_buckets * self.bucket_slots


class Probe(NamedTuple):
    """One name's fingerprint and candidate bucket pair (two hash invocations)."""

    fp: int
    i1: int
    i2: int


class InsertOutcome(NamedTuple):
    stored: bool
    kicks: int

    @property
    def full(self) -> bool:
        return not self.stored


FULL = InsertOutcome(False, -1)


def fingerprint_of(name: str, config: FilterConfig) -> int:
    """f-bit digest of a name; never 0 (0 is the empty-slot sentinel)."""
    d = mix64(name.encode("utf-8"), config.seed)
    fp = (d >> 32) & ((1 << config.fingerprint_bits) - 1)
    return fp or 1


def alt_bucket(index: int, fp: int, config: FilterConfig) -> int:
    """The other candidate bucket: index XOR hash(fingerprint). Involutive."""
    d = mix64(fp.to_bytes(2, "little"), (config.seed ^ P3) & MASK64)
    return index ^ (d & (config.num_buckets - 1))


def candidate_buckets(name: str, config: FilterConfig) -> tuple[int, int]:
    d = mix64(name.encode("utf-8"), config.seed)
    i1 = d & (config.num_buckets - 1)
    fp = (d >> 32) & ((1 << config.fingerprint_bits) - 1) or 1
    return i1, alt_bucket(i1, fp, config)


class CuckooTable:
    """Bit-packed cuckoo filter; multi-lane and payload-capable.

    Single-writer. Concurrent readers are safe between mutations; there is no
    internal locking.
    """

    def __init__(self, config: FilterConfig, lanes: int = 1, payload_bits: int = 0,
                 hasher: NameHasher | None = None, victim_seed: int | None = None,
                 kernels=None):
        self.config = config
        self.lanes = lanes
        self.payload_bits = payload_bits
        self.hasher = hasher if hasher is not None else NameHasher(config.seed)
        self._rng = random.Random((config.seed ^ 0x5B1F) if victim_seed is None
                                  else victim_seed)
        self._kernels = kernels
        nslots = config.num_buckets * lanes * config.bucket_slots
        self.fp_plane = SlotPlane(nslots, config.fingerprint_bits)
        self.pay_plane = SlotPlane(nslots, payload_bits) if payload_bits > 0 else None
        self.counts = np.zeros(lanes, dtype=np.int64)
        self.probe_count = 0  # bucket rows scanned by per-op calls
        self._fp_mask = (1 << config.fingerprint_bits) - 1
        self._bucket_mask = config.num_buckets - 1

    # -- probing ---------------------------------------------------------

    def probe(self, name: str) -> Probe:
        """Fingerprint plus both candidate buckets; exactly 2 counted hashes."""
        d = self.hasher.name_digest(name.encode("utf-8"))
        fp = (d >> 32) & self._fp_mask or 1
        i1 = d & self._bucket_mask
        i2 = i1 ^ (self.hasher.fp_digest(fp) & self._bucket_mask)
        return Probe(fp, i1, i2)

    def _slot_base(self, bucket: int, lane: int) -> int:
        return (bucket * self.lanes + lane) * self.config.bucket_slots

    def _gather_fps(self, first_slot: int, nslots: int) -> int:
        """Contiguous fingerprints as one big int (slot i at bit i*width)."""
        width = self.config.fingerprint_bits
        pos = first_slot * width
        w0 = pos >> 6
        off = pos & 63
        nwords = (off + nslots * width + 63) >> 6
        words = self.fp_plane.words
        buf = 0
        for j in range(nwords):
            buf |= int(words[w0 + j]) << (64 * j)
        return buf >> off

    def scan_lane(self, probe: Probe, lane: int):
        """Scan the lane's two candidate buckets.

        Returns (matching slot indices, first free slot index or -1).
        """
        b = self.config.bucket_slots
        width = self.config.fingerprint_bits
        mask = self._fp_mask
        matches = []
        free = -1
        buckets = (probe.i1,) if probe.i1 == probe.i2 else (probe.i1, probe.i2)
        for bucket in buckets:
            self.probe_count += 1
            base = self._slot_base(bucket, lane)
            buf = self._gather_fps(base, b)
            for s in range(b):
                fp = (buf >> (s * width)) & mask
                if fp == probe.fp:
                    matches.append(base + s)
                elif fp == 0 and free < 0:
                    free = base + s
        return matches, free

    def scan_all_lanes(self, probe: Probe, want_free_lane: int = -1):
        """Fan-out scan over every lane, ascending lane order.

        Returns (matches as (lane, bucket, slot) triples, free slot in
        `want_free_lane` or -1). Each of the two bucket rows is one
        contiguous gather; probe accounting still counts per-lane buckets.
        """
        b = self.config.bucket_slots
        width = self.config.fingerprint_bits
        mask = self._fp_mask
        matches = []
        free = -1
        buckets = (probe.i1,) if probe.i1 == probe.i2 else (probe.i1, probe.i2)
        row_slots = self.lanes * b
        for bucket in buckets:
            self.probe_count += self.lanes
            base = self._slot_base(bucket, 0)
            buf = self._gather_fps(base, row_slots)
            if buf == 0 and want_free_lane < 0:
                continue
            for s in range(row_slots):
                fp = (buf >> (s * width)) & mask
                if fp == probe.fp:
                    matches.append((s // b, bucket, base + s))
                elif fp == 0 and free < 0 and s // b == want_free_lane:
                    free = base + s
        matches.sort()
        return matches, free

    def contains(self, name: str) -> bool:
        """True when either candidate bucket of any lane holds the fingerprint."""
        probe = self.probe(name)
        if self.lanes != 1:
            return bool(self.scan_all_lanes(probe)[0])
        b = self.config.bucket_slots
        width = self.config.fingerprint_bits
        mask = self._fp_mask
        buckets = (probe.i1,) if probe.i1 == probe.i2 else (probe.i1, probe.i2)
        for bucket in buckets:
            self.probe_count += 1
            buf = self._gather_fps(bucket * b, b)
            for s in range(b):
                if (buf >> (s * width)) & mask == probe.fp:
                    return True
        return False

    # -- mutation --------------------------------------------------------

    def place(self, slot: int, fp: int, payload: int, lane: int) -> None:
        self.fp_plane.write(slot, fp)
        if self.pay_plane is not None:
            self.pay_plane.write(slot, payload)
        self.counts[lane] += 1

    def insert(self, name: str, lane: int = 0, payload: int = 0) -> InsertOutcome:
        return self.insert_probed(self.probe(name), lane, payload)

    def insert_probed(self, probe: Probe, lane: int = 0, payload: int = 0,
                      free_slot: int = -1) -> InsertOutcome:
        """Store the fingerprint, relocating residents if both buckets are
        full. On overflow the displacement chain is unwound, so the table
        keeps every previously held fingerprint and the incoming one is the
        single reported loss."""
        if free_slot >= 0:
            self.place(free_slot, probe.fp, payload, lane)
            return InsertOutcome(True, 0)
        cfg = self.config
        b = cfg.bucket_slots
        width = cfg.fingerprint_bits
        for bucket in (probe.i1, probe.i2):
            self.probe_count += 1
            base = self._slot_base(bucket, lane)
            buf = self._gather_fps(base, b)
            for s in range(b):
                if (buf >> (s * width)) & self._fp_mask == 0:
                    self.place(base + s, probe.fp, payload, lane)
                    return InsertOutcome(True, 0)
        cur = probe.i1 if self._rng.randrange(2) == 0 else probe.i2
        cur_fp, cur_pay = probe.fp, payload
        undo = []
        for kick in range(cfg.max_kicks):
            victim = self._rng.randrange(b)
            slot = self._slot_base(cur, lane) + victim
            old_fp = self.fp_plane.read(slot)
            old_pay = self.pay_plane.read(slot) if self.pay_plane is not None else 0
            undo.append((slot, old_fp, old_pay))
            self.fp_plane.write(slot, cur_fp)
            if self.pay_plane is not None:
                self.pay_plane.write(slot, cur_pay)
            cur_fp, cur_pay = old_fp, old_pay
            cur ^= self.hasher.fp_digest(cur_fp) & self._bucket_mask
            self.probe_count += 1
            base = self._slot_base(cur, lane)
            for s in range(base, base + b):
                if self.fp_plane.read(s) == 0:
                    self.place(s, cur_fp, cur_pay, lane)
                    return InsertOutcome(True, kick + 1)
        for slot, old_fp, old_pay in reversed(undo):
            self.fp_plane.write(slot, old_fp)
            if self.pay_plane is not None:
                self.pay_plane.write(slot, old_pay)
        return FULL

    def clear_slot(self, slot: int, lane: int) -> None:
        self.fp_plane.write(slot, 0)
        if self.pay_plane is not None:
            self.pay_plane.write(slot, 0)
        self.counts[lane] -= 1

    def delete(self, name: str, lane: int = 0) -> bool:
        """Remove exactly one matching fingerprint copy, if present."""
        return self.delete_probed(self.probe(name), lane)

    def delete_probed(self, probe: Probe, lane: int = 0) -> bool:
        matches, _ = self.scan_lane(probe, lane)
        if not matches:
            return False
        self.clear_slot(matches[0], lane)
        return True

    # -- payload access ---------------------------------------------------

    def read_payload(self, slot: int) -> int:
        return self.pay_plane.read(slot)

    def write_payload(self, slot: int, value: int) -> None:
        self.pay_plane.write(slot, value)

    # -- bulk paths (backend kernels) --------------------------------------

    def kernels(self):
        return self._kernels if self._kernels is not None else active_kernels()

    def _pay_words(self):
        return self.pay_plane.words if self.pay_plane is not None else np.zeros(1, dtype=np.uint64)

    def insert_batch(self, blob: NameBlob, lanes=None, payload: int = 0,
                     rng_seed: int = 1) -> np.ndarray:
        """Insert every blob name into its lane; returns kicks per name
        (-1 where the table overflowed and the name was dropped)."""
        cfg = self.config
        n = len(blob)
        if lanes is None:
            lanes = np.zeros(n, dtype=np.int64)
        out = np.empty(n, dtype=np.int64)
        self.kernels().cuckoo_insert_batch(
            self.fp_plane.words, self._pay_words(), cfg.num_buckets, self.lanes,
            cfg.bucket_slots, cfg.fingerprint_bits, self.payload_bits,
            cfg.max_kicks, blob.flat, blob.offsets, lanes, np.uint64(payload),
            np.uint64(self.hasher.seed), np.uint64(self.hasher.fp_seed),
            rng_seed, out, self.hasher.counter.arr)
        stored = out >= 0
        if self.lanes == 1:
            self.counts[0] += int(stored.sum())
        else:
            np.add.at(self.counts, lanes[stored], 1)
        return out

    def contains_batch(self, blob: NameBlob) -> np.ndarray:
        cfg = self.config
        out = np.empty(len(blob), dtype=np.uint8)
        self.kernels().cuckoo_lookup_batch(
            self.fp_plane.words, cfg.num_buckets, self.lanes, cfg.bucket_slots,
            cfg.fingerprint_bits, blob.flat, blob.offsets,
            np.uint64(self.hasher.seed), np.uint64(self.hasher.fp_seed),
            out, self.hasher.counter.arr)
        return out

    # -- accounting --------------------------------------------------------

    @property
    def item_count(self) -> int:
        return int(self.counts.sum())

    def load_factor(self) -> float:
        return self.item_count / (self.config.slots * self.lanes)

    def memory_bits(self) -> int:
        return self.config.slots * self.lanes * (self.config.fingerprint_bits + self.payload_bits)

    def iter_entries(self):
        """Yield (lane, bucket, slot_index, fp, payload) for occupied slots."""
        fps = self.fp_plane.read_all()
        occupied = np.nonzero(fps)[0]
        b = self.config.bucket_slots
        for s in occupied.tolist():
            within = s // b
            lane = within % self.lanes
            bucket = within // self.lanes
            pay = self.pay_plane.read(s) if self.pay_plane is not None else 0
            yield lane, bucket, s, int(fps[s]), pay
