"""Distributed cuckoo-filter pending interest table with baseline PITs,
a workload generator, a minimal NDN router simulator, and a benchmark CLI."""

from .baselines import ChainHashPit, DipitPit, Ht32Pit, OraclePit
from .bloom import CountingBloomFilter, bloom_fpp, bloom_m_for_fpp
from .cuckoo import (
    CuckooTable,
    FilterConfig,
    InsertOutcome,
    alt_bucket,
    candidate_buckets,
    fingerprint_of,
    fpr_closed_form,
)
from .hashing import DEFAULT_SEED, HashCounter, NameBlob, NameHasher, mix64
from .pit import (
    DataDecision,
    DicupitPit,
    InterestDecision,
    PitConfig,
    hash_invocations_per_lookup,
    memory_bits_formula,
)
from .router import Fib, ContentStore, SimReport, Topology, load_topology, run_scenario
from .workload import (
    TraceEvent,
    WorkloadSpec,
    gen_names,
    gen_trace,
    load_names,
    read_trace_csv,
    write_names,
    write_trace_csv,
    zipf_weights,
)

__all__ = [
    "ChainHashPit", "DipitPit", "Ht32Pit", "OraclePit",
    "CountingBloomFilter", "bloom_fpp", "bloom_m_for_fpp",
    "CuckooTable", "FilterConfig", "InsertOutcome",
    "alt_bucket", "candidate_buckets", "fingerprint_of", "fpr_closed_form",
    "DEFAULT_SEED", "HashCounter", "NameBlob", "NameHasher", "mix64",
    "DataDecision", "DicupitPit", "InterestDecision", "PitConfig",
    "hash_invocations_per_lookup", "memory_bits_formula",
    "Fib", "ContentStore", "SimReport", "Topology", "load_topology", "run_scenario",
    "TraceEvent", "WorkloadSpec", "gen_names", "gen_trace", "load_names",
    "read_trace_csv", "write_names", "write_trace_csv", "zipf_weights",
]

__version__ = "0.1.0"
