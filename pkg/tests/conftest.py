"""Shared fixtures: the three-consumer/one-producer router scenario and a
PIT factory covering every implementation."""

import pytest

from dicupit.bench import build_pit
from dicupit.router import parse_topology
from dicupit.workload import TraceEvent

SCENARIO_NAME = "razi/ac/ir/eng/computer-engineering.html"

SCENARIO_TOPOLOGY = """\
# one router, three consumers, one producer
router   R1 ports=8 cs=64
consumer C1 R1 1
consumer C2 R1 2
consumer C3 R1 3
producer P1 R1 0
fib      R1 razi 0
"""


def seven_step_trace():
    """I1 from C1, I2 from C2 (aggregates), D1 (fan-out + cache), I3 from C3
    (content-store hit)."""
    return [
        TraceEvent(0, 0, "I", SCENARIO_NAME, 1),
        TraceEvent(1, 1000, "I", SCENARIO_NAME, 2),
        TraceEvent(2, 2000, "D", SCENARIO_NAME, -1),
        TraceEvent(3, 3000, "I", SCENARIO_NAME, 3),
    ]


@pytest.fixture
def scenario_topology():
    return parse_topology(SCENARIO_TOPOLOGY)


def pit_factory(impl, expected=1000, **kw):
    def factory(ports):
        return build_pit(impl, expected, ports=ports, **kw)
    return factory
