"""Bit-packed slot plane: write/read roundtrips against a plain list model."""

import random

import pytest

from dicupit.packed import SlotPlane


@pytest.mark.parametrize("width", [4, 6, 13, 16, 22, 30, 48, 64])
def test_roundtrip_random(width):
    rng = random.Random(width)
    n = 257
    plane = SlotPlane(n, width)
    model = [0] * n
    for _ in range(2000):
        slot = rng.randrange(n)
        val = rng.randrange(1 << width)
        plane.write(slot, val)
        model[slot] = val
        probe = rng.randrange(n)
        assert plane.read(probe) == model[probe]
    assert plane.read_all().tolist() == model


def test_neighbours_untouched():
    plane = SlotPlane(10, 22)
    for s in range(10):
        plane.write(s, s + 1)
    plane.write(5, 0)
    assert [plane.read(s) for s in range(10)] == [1, 2, 3, 4, 5, 0, 7, 8, 9, 10]


def test_bits_accounting():
    plane = SlotPlane(1000, 22)
    assert plane.bits == 22000
