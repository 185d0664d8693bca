"""NDN name corpora and timestamped interest/data traces.

Names are hierarchical slash-separated strings ("razi/ac/ir"). Traces are
open-loop: interests arrive on fixed per-port slot schedules, name popularity
is Zipf-weighted, and every pending name is answered by exactly one data
event one round trip after the interest that created the pending cycle.
Duplicate interests (the aggregation workload) consume the next slot of a
different port, so the realized per-port rate stays on schedule.

Ties in the merged event stream order data before interests, so an interest
arriving at the instant its predecessor's data arrives starts a new cycle.
"""

from __future__ import annotations

import csv
import heapq
from collections import deque
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

MAX_RENDERED_LEN = 8192


class NameFormatError(ValueError):
    """A name line that violates the component rules."""


def parse_name(line: str, lineno: int | None = None) -> str:
    """Validate one rendered name: non-empty components, no stray slashes,
    bounded length. Returns the name unchanged."""
    where = f" (line {lineno})" if lineno is not None else ""
    if len(line) > MAX_RENDERED_LEN:
        raise NameFormatError(f"name longer than {MAX_RENDERED_LEN} bytes{where}")
    parts = line.split("/")
    if not parts or any(p == "" for p in parts):
        raise NameFormatError(f"empty name component in {line!r}{where}")
    return line


def name_components(name: str) -> tuple[str, ...]:
    return tuple(name.split("/"))


def load_names(path) -> list[str]:
    """One name per line, UTF-8; blank lines skipped, duplicates dropped
    keeping the first occurrence."""
    seen = set()
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line:
                continue
            name = parse_name(line, lineno)
            if name not in seen:
                seen.add(name)
                out.append(name)
    return out


def write_names(names: Iterable[str], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for n in names:
            fh.write(n + "\n")


_SYLLABLES = [
    "razi", "edu", "video", "cdn", "static", "media", "files", "arch",
    "news", "img", "data", "cache", "web", "api", "docs", "mail",
    "shop", "blog", "wiki", "maps", "cloud", "apps", "labs", "eng",
]


def gen_names(count: int, zipf_s: float = 0.9, seed: int = 0) -> list[str]:
    """Deterministic URL-like corpus: 2..8 components, distinct names.

    zipf_s is carried by the companion weight table (`zipf_weights`), not by
    the corpus itself; rank order is corpus order.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    depth = rng.integers(2, 9, size=count)
    picks = rng.integers(0, len(_SYLLABLES), size=(count, 8))
    tails = rng.integers(0, 10**9, size=count)
    names = []
    for i in range(count):
        parts = [_SYLLABLES[picks[i, j]] for j in range(depth[i] - 1)]
        parts.append(f"seg-{i:07d}-{tails[i]:09d}.html")
        names.append("/".join(parts))
    return names


def zipf_weights(count: int, s: float) -> np.ndarray:
    """Normalized popularity weights rank^(-s) for ranks 1..count; s=0 is
    uniform."""
    ranks = np.arange(1, count + 1, dtype=np.float64)
    w = ranks ** (-s)
    return w / w.sum()


class TraceEvent(NamedTuple):
    seq: int
    time_us: int
    kind: str          # "I" or "D"
    name: str
    interface: int     # arrival port for I; -1 for D (arrives from upstream)


@dataclass(frozen=True)
class WorkloadSpec:
    num_names: int
    rate_per_port: float = 1e5
    rtt_us: int = 80_000
    dup_prob: float = 0.2
    zipf_s: float = 0.9
    seed: int = 0
    num_ports: int = 8
    num_interests: int = 10_000

    def __post_init__(self):
        if not (0.0 <= self.dup_prob <= 1.0):
            raise ValueError("dup_prob must be in [0, 1]")
        if self.rtt_us <= 0:
            raise ValueError("rtt_us must be positive")
        if self.num_ports < 1:
            raise ValueError("need at least one port")
        if self.rate_per_port <= 0:
            raise ValueError("rate_per_port must be positive")


class _ZipfDraws:
    """Buffered deterministic Zipf sampler over name ranks."""

    def __init__(self, count, s, rng, chunk=8192):
        self.cum = np.cumsum(zipf_weights(count, s))
        self.cum[-1] = 1.0
        self.rng = rng
        self.chunk = chunk
        self.buf = []

    def next(self) -> int:
        if not self.buf:
            u = self.rng.random(self.chunk)
            self.buf = np.searchsorted(self.cum, u, side="right").tolist()
            self.buf.reverse()
        return self.buf.pop()


def gen_trace(names: list[str], spec: WorkloadSpec) -> list[TraceEvent]:
    """Produce a chronologically ordered event list.

    Exactly `spec.num_interests` interest events are scheduled across the
    ports; every pending cycle's data event follows at +rtt_us, including
    those past the last interest (the trace drains)."""
    if not names:
        raise ValueError("need a non-empty name corpus")
    rng = np.random.default_rng(spec.seed)
    draws = _ZipfDraws(len(names), spec.zipf_s, rng)
    ports = spec.num_ports
    spacing = 1e6 / spec.rate_per_port
    pending: dict[str, int] = {}
    dup_queue = [deque() for _ in range(ports)]
    data_heap: list[tuple[int, int, str]] = []
    events: list[TraceEvent] = []
    order = 0

    def drain_data_until(t_limit):
        nonlocal order
        while data_heap and data_heap[0][0] <= t_limit:
            t, _, name = heapq.heappop(data_heap)
            pending.pop(name, None)
            events.append(TraceEvent(0, t, "D", name, -1))

    issued = 0
    slot = 0
    while issued < spec.num_interests:
        for port in range(ports):
            if issued >= spec.num_interests:
                break
            t = int(slot * spacing) + int(port * spacing / ports)
            drain_data_until(t)
            if dup_queue[port]:
                name = dup_queue[port].popleft()
            else:
                if len(pending) >= len(names):
                    raise RuntimeError("name corpus too small for the pending load")
                name = names[draws.next()]
                retry = 0
                while name in pending:
                    retry += 1
                    if retry > 256:
                        # degenerate load: walk deterministically to any
                        # non-pending name instead of spinning on the sampler
                        start = draws.next()
                        for j in range(len(names)):
                            cand = names[(start + j) % len(names)]
                            if cand not in pending:
                                name = cand
                                break
                        break
                    name = names[draws.next()]
            events.append(TraceEvent(0, t, "I", name, port))
            issued += 1
            if name not in pending:
                t_data = t + spec.rtt_us
                pending[name] = t_data
                order += 1
                heapq.heappush(data_heap, (t_data, order, name))
                if spec.dup_prob > 0 and ports > 1 and rng.random() < spec.dup_prob:
                    other = int(rng.integers(ports - 1))
                    if other >= port:
                        other += 1
                    dup_queue[other].append(name)
        slot += 1
    drain_data_until(1 << 62)
    events.sort(key=lambda ev: (ev.time_us, ev.kind == "I", ev.interface))
    return [TraceEvent(i, ev.time_us, ev.kind, ev.name, ev.interface)
            for i, ev in enumerate(events)]


def write_trace_csv(events: Iterable[TraceEvent], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["seq", "time_us", "kind", "name", "interface"])
        for ev in events:
            w.writerow([ev.seq, ev.time_us, ev.kind, ev.name,
                        "" if ev.kind == "D" else ev.interface])


def read_trace_csv(path) -> list[TraceEvent]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["seq", "time_us", "kind", "name", "interface"]:
            raise ValueError(f"unexpected trace header: {header}")
        for row in reader:
            seq, time_us, kind, name, iface = row
            out.append(TraceEvent(int(seq), int(time_us), kind, name,
                                  -1 if iface == "" else int(iface)))
    return out
