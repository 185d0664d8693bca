"""The distributed PIT: k per-interface cuckoo sub-tables plus the shared
GlobalCu table that holds aggregated names and their interface sets.

Sub-table slots carry {fingerprint, 16-bit expiration}; GlobalCu slots add a
k-bit interface set. All tables share one hash seed pair, so a packet costs
two hash invocations total: the fingerprint/bucket digest of the name and the
displacement digest of the fingerprint. The per-interface sub-tables are lanes
of a single bucket-major array, which is what lets one GlobalSearch pass read
every interface's candidate buckets as two contiguous rows.

Timestamps are 16-bit tick counters (4 ms per tick, wrapping modulo 2^16);
comparisons use half-range windowing, so lifetimes must stay below 2^15 ticks
(about 131 s).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .cuckoo import CuckooTable, FilterConfig, Probe
from .hashing import HashCounter, NameBlob, NameHasher, mix64

TICK_US = 4000

FAR_FUTURE_EXP = 0x7FFF  # preload expiration for benchmark populations


def ticks_from_us(time_us: int) -> int:
    return (time_us // TICK_US) & 0xFFFF


def tick_add(t: int, delta: int) -> int:
    return (t + delta) & 0xFFFF


def tick_expired(exp: int, now: int) -> bool:
    """True when `exp` lies in the past half-range of `now` (exp strictly
    before now; an entry expiring exactly at `now` is still live)."""
    delta = (now - exp) & 0xFFFF
    return 0 < delta < 0x8000


class InterestDecision(Enum):
    FORWARD_TO_FIB = "forward"
    AGGREGATED = "aggregated"
    INSERT_FAILED = "insert_failed"


@dataclass(frozen=True)
class DataDecision:
    """Forward(interfaces) when non-empty; NO_MATCH otherwise."""

    interfaces: frozenset

    @property
    def is_forward(self) -> bool:
        return bool(self.interfaces)


NO_MATCH = DataDecision(frozenset())


@dataclass(frozen=True)
class PitConfig:
    filter: FilterConfig
    num_interfaces: int = 8
    interest_lifetime_ms: int = 4000
    globalcu_scale: int = 1

    def __post_init__(self):
        if self.num_interfaces < 1 or self.num_interfaces > 16:
            raise ValueError("num_interfaces must be in [1, 16]")
        s = self.globalcu_scale
        if s < 1 or (s & (s - 1)) != 0:
            raise ValueError("globalcu_scale must be a power of two")
        if self.lifetime_ticks >= 0x8000:
            raise ValueError("interest lifetime exceeds the 16-bit half-range window")

    @property
    def lifetime_ticks(self) -> int:
        return max(1, (self.interest_lifetime_ms * 1000) // TICK_US)

    @property
    def iface_bits(self) -> int:
        # byte-aligned minimum: the interface set field is 8 bits up to 8
        # ports and k bits beyond
        return max(8, self.num_interfaces)


def memory_bits_formula(num_interfaces: int, num_buckets: int, bucket_slots: int,
                        fingerprint_bits: int, globalcu_scale: int = 1) -> int:
    """Closed-form PIT size: k*e*b*(f+16) sub-table bits plus the GlobalCu's
    e*b*(f+16+max(8,k)). Accepts arbitrary e (pure arithmetic, no table built)."""
    k, e, b, f = num_interfaces, num_buckets, bucket_slots, fingerprint_bits
    return k * e * b * (f + 16) + globalcu_scale * e * b * (f + 16 + max(8, k))


class DicupitPit:
    """Distributed cuckoo PIT. Single-writer; the GlobalSearch fan-out is
    read-only and merges matches by ascending interface id."""

    name = "dicupit"

    def __init__(self, config: PitConfig, kernels=None):
        self.config = config
        fc = config.filter
        self.counter = HashCounter()
        self.hasher = NameHasher(fc.seed, self.counter)
        k = config.num_interfaces
        self.sub = CuckooTable(fc, lanes=k, payload_bits=16, hasher=self.hasher,
                               kernels=kernels)
        g_cfg = FilterConfig(num_buckets=fc.num_buckets * config.globalcu_scale,
                             bucket_slots=fc.bucket_slots,
                             fingerprint_bits=fc.fingerprint_bits,
                             max_kicks=fc.max_kicks, seed=fc.seed)
        self.globalcu = CuckooTable(g_cfg, lanes=1, payload_bits=16 + config.iface_bits,
                                    hasher=self.hasher, kernels=kernels)
        self._sub_mask = fc.num_buckets - 1
        self._glob_mask = g_cfg.num_buckets - 1
        self._fp_mask = (1 << fc.fingerprint_bits) - 1
        self.n_aggregated = 0
        self.n_forwarded = 0
        self.n_insert_failed = 0
        self.n_no_match = 0

    # -- probing -----------------------------------------------------------

    def _probe(self, name: str) -> tuple[Probe, Probe]:
        """Sub-table and GlobalCu probes from one digest pair (2 invocations)."""
        d = self.hasher.name_digest(name.encode("utf-8"))
        fp = (d >> 32) & self._fp_mask or 1
        x = self.hasher.fp_digest(fp)
        i1 = d & self._sub_mask
        g1 = d & self._glob_mask
        return (Probe(fp, i1, i1 ^ (x & self._sub_mask)),
                Probe(fp, g1, g1 ^ (x & self._glob_mask)))

    def _probe_uncounted(self, name: str) -> tuple[Probe, Probe]:
        # diagnostics path: identical digests without touching the counter
        d = mix64(name.encode("utf-8"), self.hasher.seed)
        fp = (d >> 32) & self._fp_mask or 1
        x = mix64(fp.to_bytes(2, "little"), self.hasher.fp_seed)
        i1 = d & self._sub_mask
        g1 = d & self._glob_mask
        return (Probe(fp, i1, i1 ^ (x & self._sub_mask)),
                Probe(fp, g1, g1 ^ (x & self._glob_mask)))

    def _live_sub_matches(self, matches, now):
        live = []
        for lane, bucket, slot in matches:
            if not tick_expired(self.sub.read_payload(slot), now):
                live.append((lane, bucket, slot))
        return live

    def _live_glob_match(self, matches, now):
        for slot in matches:
            pay = self.globalcu.read_payload(slot)
            if not tick_expired(pay & 0xFFFF, now):
                return slot, pay
        return -1, 0

    def global_search(self, name: str, now: int):
        """Probe every sub-table's two candidate buckets with one digest pair;
        returns the set of (interface, bucket) pairs holding the name's
        fingerprint, unexpired. Empty set means absent."""
        sp, _ = self._probe(name)
        matches, _ = self.sub.scan_all_lanes(sp)
        return {(lane, bucket) for lane, bucket, slot in
                self._live_sub_matches(matches, now)}

    def pending_interfaces(self, name: str, now: int) -> frozenset:
        """Read-only view of where a name is pending (uncounted diagnostics)."""
        sp, gp = self._probe_uncounted(name)
        g_matches, _ = self.globalcu.scan_lane(gp, 0)
        slot, pay = self._live_glob_match(g_matches, now)
        if slot >= 0:
            return frozenset(_bits_of(pay >> 16))
        matches, _ = self.sub.scan_all_lanes(sp)
        return frozenset(lane for lane, _, _ in self._live_sub_matches(matches, now))

    # -- packet operations ---------------------------------------------------

    def on_interest(self, name: str, in_interface: int, now: int) -> InterestDecision:
        """GlobalCu hit: extend its interface set. Sub-table hit elsewhere:
        migrate the entry into GlobalCu (the sub-table copy is removed to
        avoid holding the name twice). Otherwise store in this interface's
        sub-table and hand the packet to the FIB."""
        cfg = self.config
        sp, gp = self._probe(name)
        exp = tick_add(now, cfg.lifetime_ticks)
        g_matches, g_free = self.globalcu.scan_lane(gp, 0)
        slot, pay = self._live_glob_match(g_matches, now)
        if slot >= 0:
            ifmask = (pay >> 16) | (1 << in_interface)
            self.globalcu.write_payload(slot, (ifmask << 16) | exp)
            self.n_aggregated += 1
            return InterestDecision.AGGREGATED
        matches, free = self.sub.scan_all_lanes(sp, want_free_lane=in_interface)
        live = self._live_sub_matches(matches, now)
        if live:
            lanes = {lane for lane, _, _ in live}
            if lanes == {in_interface}:
                # a repeat on the same interface just refreshes its entry
                self.sub.write_payload(live[0][2], exp)
                self.n_aggregated += 1
                return InterestDecision.AGGREGATED
            ifmask = 0
            for lane in lanes | {in_interface}:
                ifmask |= 1 << lane
            outcome = self.globalcu.insert_probed(gp, 0, (ifmask << 16) | exp,
                                                  free_slot=g_free)
            if not outcome.stored:
                self.n_insert_failed += 1
                return InterestDecision.INSERT_FAILED
            for lane, _, s in live:
                self.sub.clear_slot(s, lane)
            self.n_aggregated += 1
            return InterestDecision.AGGREGATED
        outcome = self.sub.insert_probed(sp, in_interface, exp, free_slot=free)
        if not outcome.stored:
            self.n_insert_failed += 1
            return InterestDecision.INSERT_FAILED
        self.n_forwarded += 1
        return InterestDecision.FORWARD_TO_FIB

    def on_data(self, name: str, now: int) -> DataDecision:
        """GlobalCu first (aggregated names); otherwise the sub-table fan-out.
        Matched entries are removed."""
        sp, gp = self._probe(name)
        g_matches, _ = self.globalcu.scan_lane(gp, 0)
        slot, pay = self._live_glob_match(g_matches, now)
        if slot >= 0:
            self.globalcu.clear_slot(slot, 0)
            return DataDecision(frozenset(_bits_of(pay >> 16)))
        matches, _ = self.sub.scan_all_lanes(sp)
        live = self._live_sub_matches(matches, now)
        if not live:
            self.n_no_match += 1
            return NO_MATCH
        for lane, _, s in live:
            self.sub.clear_slot(s, lane)
        return DataDecision(frozenset(lane for lane, _, _ in live))

    def expire(self, now: int) -> int:
        """Clear every slot whose expiration lies strictly before `now`."""
        purged = 0
        for table in (self.sub, self.globalcu):
            fps = table.fp_plane.read_all()
            pays = table.pay_plane.read_all()
            exp = (pays & np.uint64(0xFFFF)).astype(np.int64)
            delta = (now - exp) & 0xFFFF
            dead = (fps != 0) & (delta > 0) & (delta < 0x8000)
            b = table.config.bucket_slots
            for s in np.nonzero(dead)[0].tolist():
                table.clear_slot(s, (s // b) % table.lanes)
                purged += 1
        return purged

    # -- accounting and bulk paths -------------------------------------------

    def memory_bits(self) -> int:
        return self.sub.memory_bits() + self.globalcu.memory_bits()

    def occupancy(self) -> int:
        return self.sub.item_count + self.globalcu.item_count

    def preload(self, blob: NameBlob, lanes: np.ndarray, exp: int = FAR_FUTURE_EXP,
                rng_seed: int = 1) -> int:
        """Bulk-load distinct names as pending entries (benchmark setup);
        returns how many were dropped to overflow."""
        kicks = self.sub.insert_batch(blob, lanes=lanes, payload=exp, rng_seed=rng_seed)
        return int((kicks < 0).sum())

    def lookup_batch(self, blob: NameBlob) -> np.ndarray:
        """Membership probe per name (GlobalCu plus fan-out), kernel-backed."""
        fc = self.config.filter
        out = np.empty(len(blob), dtype=np.uint8)
        self.sub.kernels().dicupit_lookup_batch(
            self.globalcu.fp_plane.words, self.globalcu.config.num_buckets,
            fc.bucket_slots, self.sub.fp_plane.words, fc.num_buckets,
            self.config.num_interfaces, fc.bucket_slots, fc.fingerprint_bits,
            blob.flat, blob.offsets, np.uint64(self.hasher.seed),
            np.uint64(self.hasher.fp_seed), out, self.counter.arr)
        return out

    fp_probe_interest = lookup_batch
    fp_probe_data = lookup_batch


def _bits_of(mask: int):
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def hash_invocations_per_lookup(pit, name: str = "hash/economy/probe",
                                interface: int = 0, now: int = 0) -> int:
    """Worst-case hash invocations over one interest/data round trip,
    measured from the PIT's instrumented counter. The data packet clears the
    probe entry, so the PIT is left as found."""
    before = pit.counter.count
    pit.on_interest(name, interface, now)
    d_interest = pit.counter.count - before
    before = pit.counter.count
    pit.on_data(name, now)
    d_data = pit.counter.count - before
    return max(d_interest, d_data)
