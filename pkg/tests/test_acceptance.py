"""Acceptance suite: one test per headline criterion, each printing a
PASS line with its measured numbers (run with `pytest -s` to see them).

Criteria, tolerances, and fixed configurations:

1. Randomized cuckoo soundness: 10^5 insert/query/delete ops x 20 seeds,
   zero false negatives for live items, XOR involution on every probed
   (bucket, fingerprint) pair, duplicate-delete semantics; < 30 s.
2. Absent-key FPR within x1.5 of 1-(1-2^-f)^(2*b*load) at loads
   {0.25, 0.5, 0.75, 0.95} for f in {6, 12}, b=4, 10^5 probes; and the
   fingerprint-width sweep reaches < 1% at load 0.95 for some f <= 16.
3. Aggregation integration: over 10^5-event traces x 5 seeds (dup_prob 0.3,
   f=16, ample capacity), each distinct pending cycle triggers exactly one
   FIB forward.
4. Hash economy and lookup ordering: <= 2 invocations per packet op for
   k in {2,4,8,16}; exactly 5 per Bloom filter consulted; median-of-5 mean
   lookup ordering dicupit < dipit and dicupit < chain at N in
   {1e5, 1e6, 2e6}.
5. Memory model: average saving vs DiPIT within 31 +/- 8 points; average
   saving vs the hash-table baselines within 68 +/- 10 points.
6. Scenario fidelity: the three-consumer fixture reproduces {insert+forward,
   aggregate, fan-out to {1,2} with deletion, CS hit} on all five PITs.
7. Oracle equivalence over a 10^5-event replay at f=12: every divergence is
   collision-explained and the collision-event rate stays <= 1.5x the
   closed-form bound at the observed load.
"""

import random
import time

import numpy as np
import pytest

from dicupit.baselines import DipitPit, OraclePit
from dicupit.bench import (
    IMPLS,
    ReplayDiff,
    build_pit,
    cmd_lookup,
    cmd_memory,
    fill_cuckoo_to_load,
    measured_absent_fpr,
    memory_improvements,
)
from dicupit.cuckoo import CuckooTable, FilterConfig, alt_bucket, fpr_closed_form
from dicupit.pit import (
    DicupitPit,
    InterestDecision,
    PitConfig,
    hash_invocations_per_lookup,
)
from dicupit.router import run_scenario
from dicupit.workload import WorkloadSpec, gen_names, gen_trace
from tests.conftest import SCENARIO_NAME, pit_factory, seven_step_trace


def test_acceptance_1_cuckoo_randomized_soundness():
    t_start = time.perf_counter()
    cfg = FilterConfig(num_buckets=4096, bucket_slots=4, fingerprint_bits=16)
    slot_budget = int(0.6 * cfg.slots)
    probed_pairs = set()
    dup_checks = 0
    for seed in range(1, 21):
        table = CuckooTable(cfg, victim_seed=seed)
        rng = random.Random(seed)
        pool = [f"name/{seed}/{i}" for i in range(30_000)]
        refs: dict[str, int] = {}
        live: list[str] = []
        stored = 0
        for _ in range(100_000):
            r = rng.random()
            if r < 0.40 and stored < slot_budget:
                name = pool[rng.randrange(len(pool))]
                probe = table.probe(name)
                probed_pairs.add((probe.i1, probe.fp))
                if table.insert_probed(probe).stored:
                    stored += 1
                    prev = refs.get(name, 0)
                    refs[name] = prev + 1
                    if prev == 0:
                        live.append(name)
            elif r < 0.80 and live:
                name = live[rng.randrange(len(live))]
                assert table.contains(name), f"false negative for live {name!r}"
            elif live:
                i = rng.randrange(len(live))
                name = live[i]
                assert table.delete(name), f"delete missed live {name!r}"
                stored -= 1
                refs[name] -= 1
                if refs[name] > 0:
                    dup_checks += 1
                    assert table.contains(name), "duplicate copy lost after delete"
                else:
                    live[i] = live[-1]
                    live.pop()
        assert table.item_count == stored == sum(refs.values())
    for i1, fp in probed_pairs:
        assert alt_bucket(alt_bucket(i1, fp, cfg), fp, cfg) == i1
    elapsed = time.perf_counter() - t_start
    assert elapsed < 30.0, f"criterion 1 exceeded its runtime budget: {elapsed:.1f}s"
    print(f"\nACCEPTANCE 1 PASS: 2,000,000 randomized ops, 0 false negatives, "
          f"involution over {len(probed_pairs)} probed pairs, "
          f"{dup_checks} duplicate-delete checks, {elapsed:.1f}s")


def test_acceptance_2_fpr_matches_closed_form_and_width_sweep():
    lines = []
    for f in (6, 12):
        for alpha in (0.25, 0.5, 0.75, 0.95):
            table = CuckooTable(FilterConfig(num_buckets=4096, bucket_slots=4,
                                             fingerprint_bits=f))
            fill_cuckoo_to_load(table, alpha, seed=1000 * f + int(alpha * 100))
            measured = measured_absent_fpr(table, probes=100_000, seed=7)
            expected = fpr_closed_form(f, 4, table.load_factor())
            ratio = measured / expected
            assert expected / 1.5 <= measured <= expected * 1.5, \
                f"f={f} load={alpha}: measured {measured} vs expected {expected}"
            lines.append(f"f={f},a={alpha}:x{ratio:.2f}")
    sweep = {}
    for f in (6, 8, 10, 12, 14, 16):
        table = CuckooTable(FilterConfig(num_buckets=4096, bucket_slots=4,
                                         fingerprint_bits=f))
        fill_cuckoo_to_load(table, 0.95, seed=500 + f)
        sweep[f] = measured_absent_fpr(table, probes=100_000, seed=11)
    reaching = {f: r for f, r in sweep.items() if r < 0.01}
    assert reaching, f"no fingerprint width under 17 bits reached <1%: {sweep}"
    print(f"\nACCEPTANCE 2 PASS: ratios within x1.5 [{' '.join(lines)}]; "
          f"widths reaching <1% at load 0.95: {sorted(reaching)}")


def test_acceptance_3_each_pending_cycle_forwards_exactly_once():
    names = gen_names(30_000, seed=77)
    total_cycles = 0
    for seed in range(1, 6):
        spec = WorkloadSpec(num_names=len(names), rate_per_port=1e5, rtt_us=2000,
                            dup_prob=0.3, zipf_s=0.9, seed=seed, num_ports=8,
                            num_interests=55_000)
        trace = gen_trace(names, spec)
        assert len(trace) >= 95_000
        cfg = PitConfig(filter=FilterConfig(num_buckets=65536, bucket_slots=4,
                                            fingerprint_bits=16),
                        num_interfaces=8, interest_lifetime_ms=40)
        pit = DicupitPit(cfg)
        forwards: dict[tuple, int] = {}
        cycle: dict[str, int] = {}
        aggregated = 0
        for ev in trace:
            now = (ev.time_us // 4000) & 0xFFFF
            if ev.kind == "I":
                decision = pit.on_interest(ev.name, ev.interface, now)
                assert decision is not InterestDecision.INSERT_FAILED, "filter overflow"
                key = (ev.name, cycle.get(ev.name, 0))
                if decision is InterestDecision.FORWARD_TO_FIB:
                    forwards[key] = forwards.get(key, 0) + 1
                else:
                    aggregated += 1
            else:
                pit.on_data(ev.name, now)
                cycle[ev.name] = cycle.get(ev.name, 0) + 1
        cycles = sum(1 for ev in trace if ev.kind == "D")
        assert len(forwards) == cycles, "some pending cycle never forwarded"
        assert all(v == 1 for v in forwards.values()), "a cycle forwarded twice"
        assert aggregated > 0
        total_cycles += cycles
    print(f"\nACCEPTANCE 3 PASS: {total_cycles} pending cycles across 5 seeds, "
          f"each forwarded exactly once")


def test_acceptance_4_hash_economy_and_lookup_ordering():
    for k in (2, 4, 8, 16):
        pit = build_pit("dicupit", 4000, ports=k)
        assert hash_invocations_per_lookup(pit) == 2, f"k={k} broke the 2-hash economy"
    dipit = DipitPit(expected_per_iface=500, ports=8, num_hashes=5)
    for i in range(50):
        dipit.on_interest(f"econ/{i}", i % 8, now=0)
    for i in range(0, 50, 2):
        dipit.on_data(f"econ/{i}", now=1)
    assert dipit.counter.count == 5 * dipit.consultations
    orderings = []
    for n in (100_000, 1_000_000, 2_000_000):
        rows = cmd_lookup(n, impls=("dicupit", "dipit", "chain"),
                          probes=200_000, repeats=5)
        mean = {r["impl"]: r["value"] for r in rows if r["metric"] == "mean_lookup_ns"}
        per_op = {r["impl"]: r["value"] for r in rows
                  if r["metric"] == "hash_invocations_per_op"}
        assert per_op["dicupit"] == pytest.approx(2.0)
        assert per_op["dipit"] == pytest.approx(40.0)  # 5 per filter x 8 filters
        assert mean["dicupit"] < mean["dipit"], f"N={n}: dicupit !< dipit {mean}"
        assert mean["dicupit"] < mean["chain"], f"N={n}: dicupit !< chain {mean}"
        orderings.append(f"N={n}: {mean['dicupit']:.0f} < "
                         f"chain {mean['chain']:.0f} / dipit {mean['dipit']:.0f} ns")
    print("\nACCEPTANCE 4 PASS: <=2 hashes for k in {2,4,8,16}; "
          "5 per consulted filter; " + "; ".join(orderings))


def test_acceptance_5_memory_model_improvements():
    rows = cmd_memory()
    vs_dipit = float(np.mean(memory_improvements(rows, "dipit")))
    vs_chain = memory_improvements(rows, "chain")
    vs_ht32 = memory_improvements(rows, "ht32")
    vs_hash = float(np.mean([(c + h) / 2 for c, h in zip(vs_chain, vs_ht32)]))
    assert 31 - 8 <= vs_dipit <= 31 + 8, f"vs DiPIT: {vs_dipit:.1f}%"
    assert 68 - 10 <= vs_hash <= 68 + 10, f"vs hash tables: {vs_hash:.1f}%"
    print(f"\nACCEPTANCE 5 PASS: memory saving {vs_dipit:.1f}% vs DiPIT "
          f"(31+/-8), {vs_hash:.1f}% vs hash-table baselines (68+/-10)")


def test_acceptance_6_scenario_fidelity_all_implementations(scenario_topology):
    for impl in IMPLS:
        pits = []

        def capture(ports, _impl=impl):
            pit = pit_factory(_impl)(ports)
            pits.append(pit)
            return pit

        report = run_scenario(scenario_topology, seven_step_trace(), capture)
        assert report.forwarded == 1, impl          # step 2: PIT insert + FIB forward
        assert report.aggregated == 1, impl         # step 3: duplicate aggregated
        assert report.delivered == 3, impl          # steps 4-5 fan-out + step 7
        assert report.cs_hits == 1, impl            # step 7: answered from the CS
        assert pits[0].pending_interfaces(SCENARIO_NAME, 1) == frozenset(), impl
        assert pits[0].occupancy() == 0, impl       # steps 4-5: entry deleted
    print(f"\nACCEPTANCE 6 PASS: seven-step scenario exact on {', '.join(IMPLS)}")


def test_acceptance_7_oracle_equivalence_on_replayed_trace():
    names = gen_names(30_000, seed=42)
    spec = WorkloadSpec(num_names=len(names), rate_per_port=1e5, rtt_us=10_000,
                        dup_prob=0.2, zipf_s=0.9, seed=11, num_ports=8,
                        num_interests=54_000)
    trace = gen_trace(names, spec)
    assert len(trace) >= 99_000
    cfg = PitConfig(filter=FilterConfig(num_buckets=2048, bucket_slots=4,
                                        fingerprint_bits=12),
                    num_interfaces=8, interest_lifetime_ms=200)
    pit = DicupitPit(cfg)
    oracle = OraclePit(ports=8, lifetime_ticks=cfg.lifetime_ticks)
    diff = ReplayDiff(pit, oracle).run(trace)
    assert not diff.unexplained, \
        f"{len(diff.unexplained)} divergences not collision-explained: " \
        f"{diff.unexplained[:3]}"
    root_rate = diff.roots / diff.events
    bound = diff.closed_form_bound()
    assert root_rate <= 1.5 * bound, \
        f"collision rate {root_rate:.5f} above 1.5x closed-form {bound:.5f}"
    print(f"\nACCEPTANCE 7 PASS: {diff.events} events, {diff.divergent} divergences "
          f"all collision-explained ({diff.roots} roots, {diff.cascades} cascades); "
          f"root rate {root_rate:.5f} <= 1.5x bound {1.5 * bound:.5f}")
