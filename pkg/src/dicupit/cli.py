"""Benchmark command line: memory / lookup / fpr / replay / gen / backends.

Examples:
    dicupit-bench memory --out memory.csv
    dicupit-bench lookup --impl dicupit --impl chain --names-count 1000000
    dicupit-bench fpr --names-count 2000000 --sweep 6,8,10,12,14,16
    dicupit-bench gen --count 5000 --trace-out trace.csv --names-out names.txt
    dicupit-bench replay --topology topo.txt --trace trace.csv --impl dicupit
    dicupit-bench backends --out backends.csv
"""

from __future__ import annotations

import argparse
import sys

from . import bench
from .baselines import OraclePit
from .hashing import DEFAULT_SEED
from .router import load_topology, run_scenario
from .workload import (
    WorkloadSpec,
    gen_names,
    gen_trace,
    load_names,
    read_trace_csv,
    write_names,
    write_trace_csv,
)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ports", type=int, default=8, help="router interfaces (k)")
    p.add_argument("--buckets", type=int, default=0,
                   help="buckets per sub-table (e); 0 sizes from the workload")
    p.add_argument("--slots", type=int, default=4, help="slots per bucket (b)")
    p.add_argument("--fp-bits", type=int, default=6, help="fingerprint width (f)")
    p.add_argument("--max-kicks", type=int, default=150)
    p.add_argument("--rtt-us", type=int, default=80_000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", default="", help="CSV output path (default stdout)")
    p.add_argument("--names", default="", help="name corpus file (one per line)")
    p.add_argument("--dipit-hashes", type=int, default=5,
                   help="DiPIT hash functions (5 headline, 7 variant)")


def _emit(rows, out_path: str) -> None:
    text = bench.rows_to_csv(rows)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _impls(args) -> tuple:
    return tuple(args.impl) if args.impl else bench.IMPLS


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="dicupit-bench", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("memory", help="analytic memory footprint across arrival rates")
    _add_common(p)
    p.add_argument("--impl", action="append", choices=bench.IMPLS)
    p.add_argument("--rates", default="10:101:10", help="rate sweep lo:hi:step")

    p = sub.add_parser("lookup", help="timed membership lookups at N names")
    _add_common(p)
    p.add_argument("--impl", action="append", choices=bench.IMPLS)
    p.add_argument("--names-count", type=int, default=100_000)
    p.add_argument("--probes", type=int, default=200_000)
    p.add_argument("--repeats", type=int, default=5)

    p = sub.add_parser("fpr", help="false-positive rates with disjoint probes")
    _add_common(p)
    p.add_argument("--impl", action="append", choices=bench.IMPLS)
    p.add_argument("--names-count", type=int, default=100_000)
    p.add_argument("--probes", type=int, default=100_000)
    p.add_argument("--sweep", default="", help="comma list of fingerprint widths")

    p = sub.add_parser("replay", help="replay a trace over a topology")
    _add_common(p)
    p.add_argument("--impl", choices=bench.IMPLS, default="dicupit")
    p.add_argument("--topology", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--report-json", default="", help="SimReport output path")
    p.add_argument("--lifetime-ms", type=int, default=4000)
    p.add_argument("--expected-names", type=int, default=0,
                   help="PIT sizing hint; 0 derives from the trace")

    p = sub.add_parser("gen", help="generate a name corpus and/or trace")
    _add_common(p)
    p.add_argument("--count", type=int, default=10_000, help="corpus size")
    p.add_argument("--zipf-s", type=float, default=0.9)
    p.add_argument("--dup-prob", type=float, default=0.2)
    p.add_argument("--rate", type=float, default=1e5, help="interests/s per port")
    p.add_argument("--interests", type=int, default=50_000)
    p.add_argument("--names-out", default="")
    p.add_argument("--trace-out", default="")

    p = sub.add_parser("backends", help="compiled kernels vs pure-Python fallback")
    _add_common(p)
    p.add_argument("--names-count", type=int, default=200_000)
    p.add_argument("--probes", type=int, default=200_000)

    args = ap.parse_args(argv)

    corpus = load_names(args.names) if getattr(args, "names", "") else None

    if args.command == "memory":
        try:
            lo, hi, step = (int(x) for x in args.rates.split(":"))
            if lo < 0 or step <= 0:
                raise ValueError
        except ValueError:
            ap.error(f"invalid --rates {args.rates!r}, expected lo:hi:step")
        rows = bench.cmd_memory(rates=range(lo, hi, step), ports=args.ports,
                                bucket_slots=args.slots, fp_bits=args.fp_bits,
                                seed=args.seed,
                                impls=args.impl or ("dicupit", "dipit", "chain", "ht32"),
                                dipit_hashes=args.dipit_hashes)
        _emit(rows, args.out)
    elif args.command == "lookup":
        rows = bench.cmd_lookup(args.names_count, impls=_impls(args), ports=args.ports,
                                bucket_slots=args.slots, fp_bits=args.fp_bits,
                                seed=args.seed, probes=args.probes,
                                repeats=args.repeats, dipit_hashes=args.dipit_hashes,
                                num_buckets=args.buckets, names=corpus)
        _emit(rows, args.out)
    elif args.command == "fpr":
        sweep = tuple(int(x) for x in args.sweep.split(",")) if args.sweep else ()
        rows = bench.cmd_fpr(args.names_count, impls=_impls(args), ports=args.ports,
                             bucket_slots=args.slots, fp_bits=args.fp_bits,
                             seed=args.seed, probes=args.probes, sweep=sweep,
                             dipit_hashes=args.dipit_hashes, num_buckets=args.buckets,
                             names=corpus)
        _emit(rows, args.out)
    elif args.command == "replay":
        topo = load_topology(args.topology)
        trace = read_trace_csv(args.trace)
        expected = args.expected_names or max(1000, sum(1 for e in trace if e.kind == "I"))
        pit_holder = {}

        def factory(ports):
            pit = bench.build_pit(args.impl, expected, ports=ports,
                                  bucket_slots=args.slots, fp_bits=args.fp_bits,
                                  max_kicks=args.max_kicks, seed=args.seed,
                                  lifetime_ms=args.lifetime_ms,
                                  dipit_hashes=args.dipit_hashes,
                                  num_buckets=args.buckets)
            pit_holder.setdefault("pit", pit)
            return pit

        shadow = None
        if args.impl != "oracle":
            entry_ports = topo.routers[topo.entry_router]["ports"]
            shadow = OraclePit(ports=entry_ports,
                               lifetime_ticks=max(1, args.lifetime_ms // 4))
        report = run_scenario(topo, trace, factory, shadow_pit=shadow)
        if args.report_json:
            bench.report_to_json(report, args.report_json)
        rows = [bench._row(args.impl, args.ports, expected, args.fp_bits,
                           metric, value, "count", args.seed)
                for metric, value in report.to_dict().items()
                if metric != "occupancy_timeline"]
        rows.append(bench._row(args.impl, args.ports, expected, args.fp_bits,
                               "memory_bits", pit_holder["pit"].memory_bits(),
                               "bits", args.seed))
        _emit(rows, args.out)
    elif args.command == "gen":
        names = corpus if corpus is not None else \
            gen_names(args.count, zipf_s=args.zipf_s, seed=args.seed)
        if args.names_out:
            write_names(names, args.names_out)
        if args.trace_out:
            spec = WorkloadSpec(num_names=len(names), rate_per_port=args.rate,
                                rtt_us=args.rtt_us, dup_prob=args.dup_prob,
                                zipf_s=args.zipf_s, seed=args.seed,
                                num_ports=args.ports, num_interests=args.interests)
            write_trace_csv(gen_trace(names, spec), args.trace_out)
        if not args.names_out and not args.trace_out:
            for n in names:
                sys.stdout.write(n + "\n")
    elif args.command == "backends":
        rows = bench.cmd_backends(args.names_count, args.probes, seed=args.seed)
        _emit(rows, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
