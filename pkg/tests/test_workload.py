"""Name corpus handling and trace generation properties."""

import hashlib

import numpy as np
import pytest

from dicupit.workload import (
    NameFormatError,
    TraceEvent,
    WorkloadSpec,
    gen_names,
    gen_trace,
    load_names,
    name_components,
    parse_name,
    read_trace_csv,
    write_names,
    write_trace_csv,
    zipf_weights,
)


# -- names ---------------------------------------------------------------------

def test_load_names_single(tmp_path):
    p = tmp_path / "names.txt"
    p.write_text("razi/ac/ir\n", encoding="utf-8")
    names = load_names(p)
    assert names == ["razi/ac/ir"]
    assert name_components(names[0]) == ("razi", "ac", "ir")


def test_load_names_empty_file(tmp_path):
    p = tmp_path / "empty.txt"
    p.write_text("", encoding="utf-8")
    assert load_names(p) == []


def test_load_names_dedup_and_blank_lines(tmp_path):
    p = tmp_path / "names.txt"
    p.write_text("a/b\n\nc/d\na/b\nc/d\n", encoding="utf-8")
    assert load_names(p) == ["a/b", "c/d"]


def test_load_names_malformed_reports_line(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("ok/name\nbroken//name\n", encoding="utf-8")
    with pytest.raises(NameFormatError, match="line 2"):
        load_names(p)


def test_parse_name_rejects_leading_slash_and_oversize():
    with pytest.raises(NameFormatError):
        parse_name("/rooted/name")
    with pytest.raises(NameFormatError):
        parse_name("x/" + "y" * 9000)


def test_gen_names_deterministic_distinct():
    a = gen_names(5000, seed=42)
    b = gen_names(5000, seed=42)
    assert a == b
    assert len(set(a)) == 5000
    assert gen_names(100, seed=1) != gen_names(100, seed=2)
    for n in a[:200]:
        comps = name_components(n)
        assert 2 <= len(comps) <= 8
        parse_name(n)


def test_names_roundtrip_file(tmp_path):
    names = gen_names(50, seed=7)
    p = tmp_path / "n.txt"
    write_names(names, p)
    assert load_names(p) == names


def test_zipf_weights_uniform_at_zero():
    w = zipf_weights(100, 0.0)
    assert np.allclose(w, 1 / 100)
    skew = zipf_weights(100, 1.0)
    assert skew[0] > skew[50] > skew[99]
    assert skew.sum() == pytest.approx(1.0)


# -- traces ---------------------------------------------------------------------

def _spec(**kw):
    # steady-state pending = ports * rate * rtt ~ 800, well under the corpus
    defaults = dict(num_names=4000, rate_per_port=1e5, rtt_us=1000,
                    dup_prob=0.2, zipf_s=0.9, seed=3, num_ports=8,
                    num_interests=4000)
    defaults.update(kw)
    return WorkloadSpec(**defaults)


def test_trace_bijection_without_duplicates():
    names = gen_names(2000, seed=1)
    events = gen_trace(names, _spec(dup_prob=0.0))
    interests = [e for e in events if e.kind == "I"]
    datas = [e for e in events if e.kind == "D"]
    assert len(interests) == 4000
    assert len(datas) == 4000


def test_trace_dup_prob_one_two_ports():
    names = gen_names(500, seed=2)
    events = gen_trace(names, _spec(num_ports=2, dup_prob=1.0, num_interests=1000))
    first_data = {}
    seen_ports = {}
    for ev in events:
        if ev.kind == "I" and ev.name not in first_data:
            seen_ports.setdefault(ev.name, set()).add(ev.interface)
        elif ev.kind == "D" and ev.name not in first_data:
            first_data[ev.name] = ev.time_us
            assert seen_ports[ev.name] == {0, 1}


def test_trace_times_non_decreasing_and_causal():
    names = gen_names(3000, seed=5)
    events = gen_trace(names, _spec(num_interests=20_000))
    first_interest = {}
    last_t = 0
    for ev in events:
        assert ev.time_us >= last_t
        last_t = ev.time_us
        if ev.kind == "I":
            first_interest.setdefault(ev.name, ev.time_us)
        else:
            assert ev.name in first_interest
            assert ev.time_us >= first_interest[ev.name]
    assert [e.seq for e in events] == list(range(len(events)))


def test_trace_rate_accuracy_within_one_percent():
    names = gen_names(5000, seed=9)
    spec = _spec(rate_per_port=1000.0, num_interests=24_000, dup_prob=0.0,
                 num_ports=2, rtt_us=20_000)
    events = gen_trace(names, spec)
    interests = [e for e in events if e.kind == "I"]
    horizon = max(e.time_us for e in interests)
    full_secs = int(horizon // 1_000_000)
    for port in (0, 1):
        for w in range(full_secs):
            n = sum(1 for e in interests
                    if e.interface == port and w * 1e6 <= e.time_us < (w + 1) * 1e6)
            assert abs(n - 1000) <= 10


def test_trace_determinism_byte_identical(tmp_path):
    names = gen_names(1000, seed=4)
    spec = _spec(num_interests=3000)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_trace_csv(gen_trace(names, spec), p1)
    write_trace_csv(gen_trace(names, spec), p2)
    h = lambda p: hashlib.sha256(p.read_bytes()).hexdigest()
    assert h(p1) == h(p2)


def test_trace_csv_roundtrip(tmp_path):
    names = gen_names(2000, seed=6)
    events = gen_trace(names, _spec(num_interests=500))
    p = tmp_path / "t.csv"
    write_trace_csv(events, p)
    back = read_trace_csv(p)
    assert back == events
    assert back[0]._fields == TraceEvent._fields


def test_trace_duplicates_arrive_before_data():
    names = gen_names(800, seed=8)
    events = gen_trace(names, _spec(dup_prob=0.5, num_interests=5000))
    data_time = {}
    dup_count = 0
    for ev in events:
        if ev.kind == "D":
            data_time[ev.name] = ev.time_us
    pending_start = {}
    for ev in events:
        if ev.kind != "I":
            pending_start.pop(ev.name, None)
            continue
        if ev.name in pending_start:
            dup_count += 1
        else:
            pending_start[ev.name] = ev.time_us
    assert dup_count > 1000  # dup_prob=0.5 over 5000 interests


def test_million_scale_uniqueness_and_monotone_times():
    names = gen_names(1_000_000, seed=13)
    assert len(set(names)) == 1_000_000
    spec = WorkloadSpec(num_names=len(names), rate_per_port=1e5, rtt_us=2000,
                        dup_prob=0.1, seed=13, num_ports=8, num_interests=560_000)
    events = gen_trace(names, spec)
    assert len(events) >= 1_000_000
    times = np.fromiter((e.time_us for e in events), dtype=np.int64)
    assert (np.diff(times) >= 0).all()
