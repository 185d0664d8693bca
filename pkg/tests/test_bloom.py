"""Counting Bloom filter semantics and the FPP formula."""

import random

import pytest

from dicupit.bloom import CountingBloomFilter, bloom_fpp, bloom_m_for_fpp


def test_fpp_empty_filter_is_zero():
    assert bloom_fpp(0, 10_000, 5) == 0.0


def test_fpp_reference_value():
    # frozen from a 30-digit evaluation of (1 - e^(-k*n/m))^k at n/m = 0.1, k = 5
    assert bloom_fpp(1000, 10_000, 5) == pytest.approx(9.43092922612247e-3, rel=1e-12)


def test_fpp_monotone_in_items():
    values = [bloom_fpp(n, 10_000, 5) for n in range(0, 5000, 250)]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_fpp_domain_errors():
    with pytest.raises(ValueError):
        bloom_fpp(10, 0, 5)
    with pytest.raises(ValueError):
        bloom_fpp(10, 100, 0)
    with pytest.raises(ValueError):
        bloom_fpp(-1, 100, 5)


def test_sizing_formula_hits_target():
    m = bloom_m_for_fpp(10_000, 5, 0.01)
    assert bloom_fpp(10_000, m, 5) <= 0.01
    assert bloom_fpp(10_000, m - 50, 5) > 0.0099


def test_insert_query_no_false_negative():
    f = CountingBloomFilter(4096)
    assert not f.query("razi/ac/ir")
    f.insert("razi/ac/ir")
    assert f.query("razi/ac/ir")


def test_remove_semantics():
    f = CountingBloomFilter(4096)
    assert not f.remove("ghost")          # absent: no mutation
    before = f.nibbles.copy()
    assert (f.nibbles == before).all()
    f.insert("n/1")
    assert f.remove("n/1")
    assert not f.query("n/1")


def test_duplicate_inserts_need_matching_removes():
    f = CountingBloomFilter(4096)
    f.insert("n/1")
    f.insert("n/1")
    f.remove("n/1")
    assert f.query("n/1")
    f.remove("n/1")
    assert not f.query("n/1")


def test_five_invocations_per_consultation():
    f = CountingBloomFilter(4096, num_hashes=5)
    f.insert("a/b")
    f.query("a/b")
    f.remove("a/b")
    assert f.consultations == 3
    assert f.counter.count == 15


def test_measured_fpr_close_to_formula():
    m = 8192
    f = CountingBloomFilter(m, num_hashes=5)
    rng = random.Random(3)
    n = 600
    for i in range(n):
        f.insert(f"member/{rng.randrange(10**12)}")
    probes = 20_000
    hits = sum(f.query(f"absent/{i}") for i in range(probes))
    measured = hits / probes
    expected = bloom_fpp(n, m, 5)
    assert expected / 1.5 <= measured <= expected * 1.5


def test_saturated_counters_are_sticky():
    f = CountingBloomFilter(64, num_hashes=2)
    for _ in range(40):
        f.insert("same/name")
    for _ in range(40):
        f.remove("same/name")
    # counters pinned at 15 never decrement, so the name still queries present
    assert f.query("same/name")
