"""Benchmark harness: memory, lookup, false-positive, and replay experiments
over every PIT implementation, with CSV output.

Sizing policy
-------------
Memory rows size each structure for its design point: the distributed PIT per
port at 0.9 target occupancy (bucket count rounds down to a power of two and
the per-bucket slot count absorbs the remainder, keeping capacity within a
few percent of target); DiPIT per-interface filters at 1% target FPP with a
same-sized central filter; chain at one entry pool slot per expected name
plus 10% churn slack; the open-addressed table at 0.75 load. Lookup and FPR
rows keep the default bucket geometry (4 slots) and round the bucket count up
instead, because the row layout is what the scan kernels are built around.

Desk scale: a rate index r maps to r*10^4 packets/s, so pending entries =
rate * 80 ms RTT = 800*r, spanning the 8k..80k range at r in 10..100.
"""

from __future__ import annotations

import json
import math
import time

import numpy as np

from .backend import backend_name, load_kernels
from .baselines import ChainHashPit, DipitPit, Ht32Pit, OraclePit
from .cuckoo import CuckooTable, FilterConfig, fpr_closed_form
from .hashing import DEFAULT_SEED, NameBlob
from .pit import DicupitPit, PitConfig, tick_expired
from .workload import gen_names

CSV_HEADER = "impl,ports,entries,fp_bits,metric,value,unit,seed"

IMPLS = ("dicupit", "dipit", "chain", "ht32", "oracle")

DESK_PPS_PER_RATE = 10_000
RTT_S = 0.080
DICUPIT_TARGET_LOAD = 0.9
HT32_TARGET_LOAD = 0.75
CHAIN_SLACK = 1.1


def next_pow2(n: int) -> int:
    return 1 << max(0, int(n) - 1).bit_length()


def floor_pow2(n: int) -> int:
    return 1 << (max(1, int(n)).bit_length() - 1)


def subtable_geometry(expected_per_iface: int, bucket_slots: int = 4,
                      mode: str = "lookup") -> tuple[int, int]:
    """(num_buckets, bucket_slots) for one per-interface sub-table.

    mode="memory": buckets round down to a power of two, slots absorb the
    remainder (capacity tracks the target closely). mode="lookup": slots stay
    fixed and buckets round up (default row geometry, more headroom).
    """
    slots = math.ceil(max(1, expected_per_iface) / DICUPIT_TARGET_LOAD)
    if mode == "memory":
        e = max(8, floor_pow2(slots // bucket_slots))
        return e, math.ceil(slots / e)
    return max(8, next_pow2(math.ceil(slots / bucket_slots))), bucket_slots


def build_pit(impl: str, expected_names: int, ports: int = 8, bucket_slots: int = 4,
              fp_bits: int = 6, max_kicks: int = 150, seed: int = DEFAULT_SEED,
              lifetime_ms: int = 4000, size_mode: str = "lookup",
              dipit_hashes: int = 5, num_buckets: int = 0, kernels=None):
    """Construct a PIT sized for `expected_names` concurrent pending names.

    A nonzero `num_buckets` pins the distributed PIT's sub-table bucket count
    instead of deriving it from the expected load."""
    per_iface = math.ceil(expected_names / ports)
    if impl == "dicupit":
        if num_buckets > 0:
            e, b = num_buckets, bucket_slots
        else:
            e, b = subtable_geometry(per_iface, bucket_slots, size_mode)
        cfg = PitConfig(filter=FilterConfig(num_buckets=e, bucket_slots=b,
                                            fingerprint_bits=fp_bits,
                                            max_kicks=max_kicks, seed=seed),
                        num_interfaces=ports, interest_lifetime_ms=lifetime_ms)
        return DicupitPit(cfg, kernels=kernels)
    if impl == "dipit":
        return DipitPit(expected_per_iface=per_iface, ports=ports,
                        num_hashes=dipit_hashes, seed=seed, kernels=kernels)
    if impl == "chain":
        return ChainHashPit(capacity=math.ceil(expected_names * CHAIN_SLACK),
                            num_heads=max(8, next_pow2(expected_names) // 2
                                          if next_pow2(expected_names) / expected_names > 1.5
                                          else next_pow2(expected_names)),
                            ports=ports, seed=seed,
                            lifetime_ticks=max(1, lifetime_ms // 4), kernels=kernels)
    if impl == "ht32":
        return Ht32Pit(num_slots=max(8, next_pow2(math.ceil(expected_names / HT32_TARGET_LOAD))),
                       ports=ports, seed=seed,
                       lifetime_ticks=max(1, lifetime_ms // 4), kernels=kernels)
    if impl == "oracle":
        return OraclePit(ports=ports, lifetime_ticks=max(1, lifetime_ms // 4))
    raise ValueError(f"unknown implementation {impl!r}")


def _row(impl, ports, entries, fp_bits, metric, value, unit, seed):
    return {"impl": impl, "ports": ports, "entries": entries, "fp_bits": fp_bits,
            "metric": metric, "value": value, "unit": unit, "seed": seed}


def rows_to_csv(rows) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        v = r["value"]
        value = str(v) if isinstance(v, int) else f"{v:.6g}"
        lines.append(f'{r["impl"]},{r["ports"]},{r["entries"]},{r["fp_bits"]},'
                     f'{r["metric"]},{value},{r["unit"]},{r["seed"]}')
    return "\n".join(lines) + "\n"


def write_rows(rows, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(rows_to_csv(rows))


# -- memory experiment -------------------------------------------------------

def cmd_memory(rates=range(10, 101, 10), ports: int = 8, bucket_slots: int = 4,
               fp_bits: int = 6, seed: int = DEFAULT_SEED, impls=None,
               dipit_hashes: int = 5) -> list[dict]:
    """Analytic memory footprint per implementation per arrival rate; every
    value is read back from a constructed instance, not a side formula."""
    impls = impls or ("dicupit", "dipit", "chain", "ht32")
    rows = []
    for r in rates:
        entries = max(1, round(r * DESK_PPS_PER_RATE * RTT_S))
        for impl in impls:
            pit = build_pit(impl, entries, ports=ports, bucket_slots=bucket_slots,
                            fp_bits=fp_bits, seed=seed, size_mode="memory",
                            dipit_hashes=dipit_hashes)
            rows.append(_row(impl, ports, entries, fp_bits, "memory_bits",
                             pit.memory_bits(), "bits", seed))
    return rows


def memory_improvements(rows, baseline: str, against=("dicupit",)) -> list[float]:
    """Per-rate relative memory saving of `against` vs `baseline`, in percent."""
    by_key = {(r["impl"], r["entries"]): r["value"] for r in rows
              if r["metric"] == "memory_bits"}
    entries = sorted({e for (_, e) in by_key})
    out = []
    for e in entries:
        base = by_key[(baseline, e)]
        ours = sum(by_key[(i, e)] for i in against) / len(against)
        out.append(100.0 * (1.0 - ours / base))
    return out


# -- lookup experiment ----------------------------------------------------------

def _make_corpus(n: int, seed: int):
    return gen_names(n, seed=seed)


def _probe_mix(names, n_probes: int, seed: int) -> NameBlob:
    """50/50 present/absent probes, deterministically shuffled."""
    rng = np.random.default_rng(seed ^ 0x50B0)
    half = n_probes // 2
    idx = rng.integers(0, len(names), size=half)
    absent = gen_names(n_probes - half, seed=seed ^ 0xAB5E)
    mixed = [names[i] for i in idx] + [n + "/x" for n in absent]
    order = rng.permutation(len(mixed))
    return NameBlob.from_names([mixed[i] for i in order])


def _time_lookup(pit, blob: NameBlob, repeats: int, chunks: int = 50):
    """Chunked timing: returns (median-of-run mean ns/op, p99 of chunk means)."""
    pit.lookup_batch(blob)  # warm
    n = len(blob)
    bounds = np.linspace(0, n, chunks + 1, dtype=np.int64)
    run_means = []
    chunk_means = []
    for _ in range(repeats):
        total = 0
        for c in range(chunks):
            lo, hi = int(bounds[c]), int(bounds[c + 1])
            if hi == lo:
                continue
            sub = NameBlob(blob.flat, blob.offsets[lo:hi + 1])
            t0 = time.perf_counter_ns()
            pit.lookup_batch(sub)
            dt = time.perf_counter_ns() - t0
            total += dt
            chunk_means.append(dt / (hi - lo))
        run_means.append(total / n)
    return float(np.median(run_means)), float(np.percentile(chunk_means, 99))


def cmd_lookup(name_count: int, impls=IMPLS, ports: int = 8, bucket_slots: int = 4,
               fp_bits: int = 6, seed: int = DEFAULT_SEED, probes: int = 200_000,
               repeats: int = 5, dipit_hashes: int = 5, num_buckets: int = 0,
               names=None, kernels=None) -> list[dict]:
    """Insert N names, then time membership lookups (50/50 hit/miss mix).
    A caller-supplied corpus overrides the generated one."""
    names = list(names)[:name_count] if names is not None else _make_corpus(name_count, seed)
    name_count = len(names)
    blob = NameBlob.from_names(names)
    rng = np.random.default_rng(seed)
    lanes = rng.integers(0, ports, size=name_count).astype(np.int64)
    probe_blob = _probe_mix(names, probes, seed)
    rows = []
    for impl in impls:
        try:
            pit = build_pit(impl, name_count, ports=ports, bucket_slots=bucket_slots,
                            fp_bits=fp_bits, seed=seed, dipit_hashes=dipit_hashes,
                            num_buckets=num_buckets, kernels=kernels)
            dropped = pit.preload(blob, lanes, rng_seed=seed & 0x7FFFFFFF)
        except MemoryError:
            rows.append(_row(impl, ports, name_count, fp_bits, "partial_oom",
                             1, "flag", seed))
            continue
        mean_ns, p99_ns = _time_lookup(pit, probe_blob, repeats)
        before = pit.counter.count
        pit.lookup_batch(probe_blob)
        per_op = (pit.counter.count - before) / len(probe_blob)
        rows.append(_row(impl, ports, name_count, fp_bits, "mean_lookup_ns",
                         mean_ns, "ns", seed))
        rows.append(_row(impl, ports, name_count, fp_bits, "p99_lookup_ns",
                         p99_ns, "ns", seed))
        rows.append(_row(impl, ports, name_count, fp_bits, "hash_invocations_per_op",
                         per_op, "count", seed))
        if dropped:
            rows.append(_row(impl, ports, name_count, fp_bits, "preload_dropped",
                             dropped, "count", seed))
    return rows


# -- false-positive experiment ------------------------------------------------------

def cmd_fpr(name_count: int, impls=IMPLS, ports: int = 8, bucket_slots: int = 4,
            fp_bits: int = 6, seed: int = DEFAULT_SEED, probes: int = 100_000,
            sweep=None, dipit_hashes: int = 5, num_buckets: int = 0,
            probe_names=None, names=None, kernels=None) -> list[dict]:
    """Insert N names, probe with N disjoint names; report the two
    false-positive modes (interest loss and data misforward) per
    implementation, plus a fingerprint-width sweep for the distributed PIT.

    Caller-supplied probe_names must be disjoint from the inserted corpus;
    any overlap aborts (an overlapping probe is a guaranteed hit and would
    corrupt the rate)."""
    names = list(names)[:name_count] if names is not None else _make_corpus(name_count, seed)
    name_count = len(names)
    inserted = set(names)
    if probe_names is not None:
        overlap = inserted.intersection(probe_names)
        if overlap:
            raise ValueError(f"probe names overlap the inserted corpus: "
                             f"{sorted(overlap)[:3]}")
        probes = len(probe_names)
    else:
        probe_names = [n for n in gen_names(probes + 1000, seed=seed ^ 0xF9)
                       if n not in inserted][:probes]
        if len(probe_names) < probes:
            raise ValueError("generated probe namespace overlaps the corpus")
    blob = NameBlob.from_names(names)
    probe_blob = NameBlob.from_names(probe_names)
    lanes = (np.arange(name_count) % ports).astype(np.int64)
    rows = []
    for impl in impls:
        pit = build_pit(impl, name_count, ports=ports, bucket_slots=bucket_slots,
                        fp_bits=fp_bits, seed=seed, dipit_hashes=dipit_hashes,
                        num_buckets=num_buckets, kernels=kernels)
        pit.preload(blob, lanes, rng_seed=seed & 0x7FFFFFFF)
        loss = float(pit.fp_probe_interest(probe_blob).mean())
        misfwd = float(pit.fp_probe_data(probe_blob).mean())
        rows.append(_row(impl, ports, name_count, fp_bits,
                         "fp_interest_loss_rate", loss, "rate", seed))
        rows.append(_row(impl, ports, name_count, fp_bits,
                         "fp_data_misforward_rate", misfwd, "rate", seed))
    for f in (sweep or ()):
        pit = build_pit("dicupit", name_count, ports=ports, bucket_slots=bucket_slots,
                        fp_bits=f, seed=seed, num_buckets=num_buckets, kernels=kernels)
        pit.preload(blob, lanes, rng_seed=seed & 0x7FFFFFFF)
        loss = float(pit.fp_probe_interest(probe_blob).mean())
        rows.append(_row("dicupit", ports, name_count, f,
                         "fp_interest_loss_rate", loss, "rate", seed))
    return rows


def fill_cuckoo_to_load(table: CuckooTable, load: float, seed: int = 0,
                        tag: str = "fill") -> int:
    """Insert distinct names until the table reaches `load`; names that
    overflow are redrawn. Returns the number inserted."""
    target = round(load * table.config.slots * table.lanes)
    rng = np.random.default_rng(seed)
    inserted = 0
    while table.item_count < target:
        batch = min(4096, target - table.item_count)
        names = [f"{tag}/{int(x):016d}" for x in rng.integers(0, 1 << 62, size=batch)]
        kicks = table.insert_batch(NameBlob.from_names(names),
                                   rng_seed=int(rng.integers(1, 1 << 31)))
        inserted += int((kicks >= 0).sum())
    return inserted


def measured_absent_fpr(table: CuckooTable, probes: int = 100_000,
                        seed: int = 1) -> float:
    blob = NameBlob.from_names([f"absent/{i:012d}" for i in range(probes)])
    return float(table.contains_batch(blob).mean())


# -- replay ---------------------------------------------------------------------------

class ReplayDiff:
    """Forwarding-decision divergence between a PIT and the exact reference.

    Every event is first screened for a physical fingerprint collision: some
    other name, live-pending per the oracle, sharing the probed fingerprint
    and a candidate bucket. Such events are roots (this is exactly the
    probability the closed-form FPR predicts) and taint every name involved,
    whether or not the decision diverged on the spot: a collision can corrupt
    state silently and only surface later. A divergence is then explained as
    a root, a tainted name, or a match against a stale slot that an earlier
    collision left behind; anything else is reported unexplained.
    """

    def __init__(self, pit: DicupitPit, oracle: OraclePit):
        self.pit = pit
        self.oracle = oracle
        self.taint: set[str] = set()
        self.roots = 0
        self.cascades = 0
        self.unexplained = []
        self.events = 0
        self.divergent = 0
        self._load_sum = 0.0
        self._load_n = 0
        self._probe_cache: dict[str, tuple] = {}
        self._fp_groups: dict[int, set[str]] = {}

    def _probes(self, name):
        got = self._probe_cache.get(name)
        if got is None:
            got = self.pit._probe_uncounted(name)
            self._probe_cache[name] = got
        return got

    def _colliders(self, name, now):
        """Live oracle-pending names whose entry the probe for `name` can
        physically match: same fingerprint and a shared candidate bucket in
        the table where that entry lives (sub-table while pending on one
        interface, GlobalCu once aggregated)."""
        sp, gp = self._probes(name)
        out = []
        for other in self._fp_groups.get(sp.fp, ()):
            if other == name:
                continue
            entry = self.oracle.table.get(other)
            if entry is None or tick_expired(entry[0], now):
                continue
            osp, ogp = self._probes(other)
            if len(entry[1]) >= 2:
                hit = bool({ogp.i1, ogp.i2} & {gp.i1, gp.i2})
            else:
                hit = bool({osp.i1, osp.i2} & {sp.i1, sp.i2})
            if hit:
                out.append(other)
        return out

    def _classify(self, name, now, is_root: bool):
        self.divergent += 1
        if is_root:
            return
        if name in self.taint:
            self.cascades += 1
        elif self.pit.pending_interfaces(name, now):
            # live fingerprint match with no pending collider: a stale slot
            # left behind by an earlier collision event
            self.cascades += 1
            self.taint.add(name)
        else:
            self.unexplained.append(name)

    def run(self, trace):
        cap = ((self.pit.config.num_interfaces + 1) * self.pit.config.filter.slots
               * self.pit.config.globalcu_scale)
        groups = self._fp_groups
        for ev in trace:
            now = (ev.time_us // 4000) & 0xFFFF
            self.events += 1
            self._load_sum += self.pit.occupancy() / cap
            self._load_n += 1
            name = ev.name
            colliders = self._colliders(name, now)
            if colliders:
                self.roots += 1
                self.taint.add(name)
                self.taint.update(colliders)
            if ev.kind == "I":
                mine = self.pit.on_interest(name, ev.interface, now)
                ref = self.oracle.on_interest(name, ev.interface, now)
                groups.setdefault(self._probes(name)[0].fp, set()).add(name)
                if mine is not ref:
                    self._classify(name, now, bool(colliders))
            else:
                mine = self.pit.on_data(name, now)
                ref = self.oracle.on_data(name, now)
                if name not in self.oracle.table:
                    grp = groups.get(self._probes(name)[0].fp)
                    if grp is not None:
                        grp.discard(name)
                if mine.interfaces != ref.interfaces:
                    self._classify(name, now, bool(colliders))
        return self

    @property
    def mean_load(self) -> float:
        return self._load_sum / max(1, self._load_n)

    def closed_form_bound(self) -> float:
        """Per-event collision probability at the observed mean load, with
        the fan-out across all k+1 tables folded in."""
        fc = self.pit.config.filter
        k = self.pit.config.num_interfaces
        return fpr_closed_form(fc.fingerprint_bits, fc.bucket_slots,
                               self.mean_load * (k + 1))


# -- backend comparison ------------------------------------------------------------

def cmd_backends(name_count: int = 200_000, probes: int = 200_000,
                 seed: int = DEFAULT_SEED, repeats: int = 3) -> list[dict]:
    """Time the compiled kernels against the pure-Python fallbacks on the
    same cuckoo geometry (insert + membership lookup)."""
    rows = []
    names = gen_names(name_count, seed=seed)
    blob = NameBlob.from_names(names)
    probe_blob = _probe_mix(names, probes, seed)
    e = next_pow2(math.ceil(name_count / 0.9 / 4))
    for spec in ("numba", "numpy"):
        try:
            kern = load_kernels(spec)
        except ImportError:
            continue
        scale = 1 if backend_name(kern) == "numba" else 50
        t = CuckooTable(FilterConfig(num_buckets=e), kernels=kern)
        n_ins = max(1000, name_count // scale)
        ins_blob = NameBlob.from_names(names[:n_ins])
        t0 = time.perf_counter_ns()
        t.insert_batch(ins_blob, rng_seed=7)
        rows.append(_row(spec, 1, name_count, 6, "insert_ns",
                         (time.perf_counter_ns() - t0) / n_ins, "ns", seed))
        n_probe = max(1000, probes // scale)
        sub = NameBlob(probe_blob.flat, probe_blob.offsets[:n_probe + 1])
        t.contains_batch(sub)  # warm
        best = []
        for _ in range(repeats):
            t0 = time.perf_counter_ns()
            t.contains_batch(sub)
            best.append((time.perf_counter_ns() - t0) / n_probe)
        rows.append(_row(spec, 1, name_count, 6, "lookup_ns",
                         float(np.median(best)), "ns", seed))
    return rows


def report_to_json(report, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
