"""Tests for the capacity model."""

from fractions import Fraction

import numpy as np
import pytest

from src.capacity import (
    CapacityParams,
    fits,
    pair_capacity_bytes,
    strand_bytes,
    tube_capacity_array,
    tube_capacity_bytes,
)


def test_pair_capacity_blawat_density():
    params = CapacityParams(payload_len=200, density=Fraction(8, 5), parallel_factor=1_550_000)
    assert pair_capacity_bytes(params) == 62_000_000


def test_pair_capacity_cac_density():
    params = CapacityParams(payload_len=200, density=Fraction(1), parallel_factor=1_550_000)
    assert pair_capacity_bytes(params) == 38_750_000


def test_strand_bytes_floor_before_parallel_factor():
    # 200 * 19/12 / 8 = 39.58 -> 39 whole bytes per strand
    assert strand_bytes(CapacityParams()) == 39
    assert pair_capacity_bytes(CapacityParams()) == 39 * 1_550_000


def test_density_coercion():
    assert CapacityParams(density="8/5").density == Fraction(8, 5)
    assert CapacityParams(density=1.6).density == Fraction(8, 5)
    assert CapacityParams(density=1).density == 1


@pytest.mark.parametrize("density", [0, Fraction(-1, 2), Fraction(5, 2)])
def test_density_out_of_range(density):
    with pytest.raises(ValueError):
        CapacityParams(density=density)


@pytest.mark.parametrize("field", ["payload_len", "parallel_factor", "library_size"])
def test_non_positive_integers_rejected(field):
    with pytest.raises(ValueError):
        CapacityParams(**{field: 0})


class TestTubeCapacity:
    def test_zero_usable(self):
        assert tube_capacity_bytes(0, CapacityParams()) == 0

    def test_odd_usable_floors_to_pairs(self):
        params = CapacityParams()
        assert tube_capacity_bytes(3, params) == pair_capacity_bytes(params)

    def test_full_library(self):
        assert tube_capacity_bytes(28_000, CapacityParams()) == 14_000 * 39 * 1_550_000

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            tube_capacity_bytes(28_001, CapacityParams())
        with pytest.raises(ValueError):
            tube_capacity_bytes(-1, CapacityParams())

    def test_monotone_in_usable(self):
        params = CapacityParams(library_size=100)
        caps = [tube_capacity_bytes(u, params) for u in range(101)]
        assert caps == sorted(caps)

    def test_monotone_in_params(self):
        base = CapacityParams(payload_len=200, density=Fraction(1), parallel_factor=10, library_size=50)
        bigger = [
            CapacityParams(payload_len=240, density=Fraction(1), parallel_factor=10, library_size=50),
            CapacityParams(payload_len=200, density=Fraction(2), parallel_factor=10, library_size=50),
            CapacityParams(payload_len=200, density=Fraction(1), parallel_factor=11, library_size=50),
        ]
        for params in bigger:
            assert tube_capacity_bytes(40, params) >= tube_capacity_bytes(40, base)

    def test_array_matches_scalar_and_clamps(self):
        params = CapacityParams(library_size=100)
        usable = np.array([-5, 0, 1, 2, 77, 100])
        expected = [0] + [tube_capacity_bytes(u, params) for u in usable[1:]]
        assert tube_capacity_array(usable, params).tolist() == expected

    def test_integer_arithmetic(self):
        assert isinstance(tube_capacity_bytes(10, CapacityParams()), int)


def test_fits():
    params = CapacityParams(payload_len=80, density=Fraction(1), parallel_factor=1, library_size=20)
    # pair holds 10 bytes; 4 collided -> 16 usable -> 8 pairs -> 80 bytes
    assert fits(80, 4, params)
    assert not fits(81, 4, params)
    assert not fits(0, 21, params)
