"""Minimal NDN forwarding pipeline: content store, PIT, FIB, over a small
static topology, replayed deterministically from a trace.

The replay is open-loop: interest events arrive on consumer-facing ports and
data events arrive from upstream, both straight from the trace. A content
store hit answers an interest locally; the matching trace data event then
finds no pending entry and is counted as an unsolicited drop, which is the
expected artifact of open-loop replay.

Topology files are flat text, one directive per line:

    router   R1 ports=8 cs=1024
    consumer C1 R1 1
    producer P1 R1 0
    fib      R1 razi 0
    link     R1 4 R2 2

Comments start with '#'. Links are bidirectional and latency-free.
"""

from __future__ import annotations

import heapq
from collections import OrderedDict
from dataclasses import dataclass, field

from .pit import InterestDecision, ticks_from_us
from .workload import TraceEvent, name_components


class ContentStore:
    """Bounded name-presence cache with least-recently-used eviction."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._names: OrderedDict[str, None] = OrderedDict()

    def lookup(self, name: str) -> bool:
        if name in self._names:
            self._names.move_to_end(name)
            return True
        return False

    def store(self, name: str) -> None:
        if self.capacity <= 0:
            return
        if name in self._names:
            self._names.move_to_end(name)
            return
        if len(self._names) >= self.capacity:
            self._names.popitem(last=False)
        self._names[name] = None

    def __len__(self) -> int:
        return len(self._names)


class Fib:
    """Static longest-prefix forwarding table over name components."""

    def __init__(self):
        self._prefixes: dict[tuple, int] = {}

    def add(self, prefix: str, out_interface: int) -> None:
        self._prefixes[name_components(prefix)] = out_interface

    def lookup(self, name: str) -> int | None:
        comps = name_components(name)
        for depth in range(len(comps), 0, -1):
            hit = self._prefixes.get(comps[:depth])
            if hit is not None:
                return hit
        return None

    def __len__(self) -> int:
        return len(self._prefixes)


@dataclass
class Router:
    id: str
    ports: int
    cs: ContentStore
    pit: object
    fib: Fib


@dataclass
class Topology:
    routers: dict = field(default_factory=dict)     # id -> dict(ports, cs)
    consumers: dict = field(default_factory=dict)   # id -> (router, iface)
    producers: dict = field(default_factory=dict)   # id -> (router, iface)
    fib_entries: list = field(default_factory=list)  # (router, prefix, iface)
    links: dict = field(default_factory=dict)       # (router, iface) -> (router, iface)
    entry_router: str = ""

    def consumer_ports(self, router_id: str) -> set:
        return {iface for (r, iface) in self.consumers.values() if r == router_id}


def parse_topology(text: str) -> Topology:
    topo = Topology()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        try:
            if kind == "router":
                opts = dict(p.split("=", 1) for p in parts[2:])
                topo.routers[parts[1]] = {"ports": int(opts.get("ports", 8)),
                                          "cs": int(opts.get("cs", 1024))}
                if not topo.entry_router:
                    topo.entry_router = parts[1]
            elif kind == "consumer":
                topo.consumers[parts[1]] = (parts[2], int(parts[3]))
            elif kind == "producer":
                topo.producers[parts[1]] = (parts[2], int(parts[3]))
            elif kind == "fib":
                topo.fib_entries.append((parts[1], parts[2], int(parts[3])))
            elif kind == "link":
                a = (parts[1], int(parts[2]))
                b = (parts[3], int(parts[4]))
                topo.links[a] = b
                topo.links[b] = a
            else:
                raise ValueError(f"unknown directive {kind!r}")
        except (IndexError, ValueError) as exc:
            raise ValueError(f"topology line {lineno}: {exc}") from exc
    if not topo.routers:
        raise ValueError("topology defines no routers")
    return topo


def load_topology(path) -> Topology:
    with open(path, encoding="utf-8") as fh:
        return parse_topology(fh.read())


@dataclass
class SimReport:
    events: int = 0
    delivered: int = 0
    aggregated: int = 0
    forwarded: int = 0
    cs_hits: int = 0
    dropped_interest_nofib: int = 0
    dropped_interest_full: int = 0
    dropped_data_nomatch: int = 0
    dropped_fp: int = 0
    occupancy_timeline: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "events": self.events,
            "delivered": self.delivered,
            "aggregated": self.aggregated,
            "forwarded": self.forwarded,
            "cs_hits": self.cs_hits,
            "dropped_interest_nofib": self.dropped_interest_nofib,
            "dropped_interest_full": self.dropped_interest_full,
            "dropped_data_nomatch": self.dropped_data_nomatch,
            "dropped_fp": self.dropped_fp,
            "occupancy_timeline": self.occupancy_timeline,
        }


def run_scenario(topology: Topology, trace: list[TraceEvent], pit_factory,
                 shadow_pit=None, sample_every: int = 1000) -> SimReport:
    """Deterministic event-ordered replay of a trace over the topology.

    `pit_factory(ports)` builds one PIT per router. With `shadow_pit` set, an
    exact reference PIT runs alongside at the entry router and every decision
    disagreement is counted in `dropped_fp`.

    Raises ValueError on a trace causality violation (a data event whose name
    was never requested, detected against the shadow when present).
    """
    routers: dict[str, Router] = {}
    for rid, opts in topology.routers.items():
        routers[rid] = Router(rid, opts["ports"], ContentStore(opts["cs"]),
                              pit_factory(opts["ports"]), Fib())
    for rid, prefix, iface in topology.fib_entries:
        routers[rid].fib.add(prefix, iface)
    consumer_ports = {rid: topology.consumer_ports(rid) for rid in routers}

    seen = set()
    for ev in trace:
        if ev.kind == "I":
            seen.add(ev.name)
        elif ev.name not in seen:
            raise ValueError(f"trace causality violation at seq {ev.seq}: "
                             f"data for {ev.name!r} precedes any interest")

    report = SimReport()
    entry = topology.entry_router
    # (time, tiebreak, order, router, kind, name, iface)
    queue: list = []
    for ev in trace:
        heapq.heappush(queue, (ev.time_us, 0 if ev.kind == "D" else 1, ev.seq,
                               entry, ev.kind, ev.name, ev.interface))
    order = len(trace)

    def emit_data(router: Router, name: str, iface: int, t: int):
        nonlocal order
        if iface in consumer_ports[router.id]:
            report.delivered += 1
        link = topology.links.get((router.id, iface))
        if link is not None:
            order += 1
            heapq.heappush(queue, (t, 0, order, link[0], "D", name, link[1]))

    def emit_interest(router: Router, name: str, iface: int, t: int):
        nonlocal order
        link = topology.links.get((router.id, iface))
        if link is not None:
            order += 1
            heapq.heappush(queue, (t, 1, order, link[0], "I", name, link[1]))

    while queue:
        t, _, _, rid, kind, name, iface = heapq.heappop(queue)
        router = routers[rid]
        now = ticks_from_us(t)
        report.events += 1
        if kind == "I":
            if router.cs.lookup(name):
                report.cs_hits += 1
                emit_data(router, name, iface, t)
                continue
            shadow_decision = (shadow_pit.on_interest(name, iface, now)
                               if shadow_pit is not None and rid == entry else None)
            decision = router.pit.on_interest(name, iface, now)
            if shadow_decision is not None and decision is not shadow_decision:
                report.dropped_fp += 1
            if decision is InterestDecision.FORWARD_TO_FIB:
                out = router.fib.lookup(name)
                if out is None:
                    report.dropped_interest_nofib += 1
                else:
                    report.forwarded += 1
                    emit_interest(router, name, out, t)
            elif decision is InterestDecision.AGGREGATED:
                report.aggregated += 1
            else:
                report.dropped_interest_full += 1
        else:
            shadow_decision = (shadow_pit.on_data(name, now)
                               if shadow_pit is not None and rid == entry else None)
            router.cs.store(name)
            decision = router.pit.on_data(name, now)
            if shadow_decision is not None and decision.interfaces != shadow_decision.interfaces:
                report.dropped_fp += 1
            if decision.is_forward:
                for out in sorted(decision.interfaces):
                    emit_data(router, name, out, t)
            else:
                report.dropped_data_nomatch += 1
        if report.events % sample_every == 0:
            report.occupancy_timeline.append((t, routers[entry].pit.occupancy()))
    return report
