from __future__ import annotations

import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from toolweaver.safety.fingerprint import Fingerprint, bitset_coefficients, morgan_fingerprint
from toolweaver.safety.smiles import parse_smiles


def fp(bits, nbits=2048):
    return Fingerprint(bits=frozenset(bits), nbits=nbits)


def test_methane_single_bit_at_every_radius():
    # one atom means one environment per round, and rounds cannot change it
    mol = parse_smiles("C")
    for radius in (0, 1, 2, 5):
        assert len(morgan_fingerprint(mol, radius=radius).bits) == 1
    assert morgan_fingerprint(mol, radius=0).bits == morgan_fingerprint(mol, radius=5).bits


def test_ethane_two_bits_at_radius_one():
    # both atoms share the radius-0 id and the radius-1 id by symmetry
    mol = parse_smiles("CC")
    assert len(morgan_fingerprint(mol, radius=1).bits) == 2


def test_identical_smiles_identical_bits():
    a = morgan_fingerprint(parse_smiles("CC(=O)Oc1ccccc1C(=O)O"))
    b = morgan_fingerprint(parse_smiles("CC(=O)Oc1ccccc1C(=O)O"))
    assert a.bits == b.bits


def test_radius_grows_environment_count():
    mol = parse_smiles("CCOC(=O)C")
    r0 = morgan_fingerprint(mol, radius=0).bits
    r2 = morgan_fingerprint(mol, radius=2).bits
    assert r0 <= r2
    assert len(r2) > len(r0)


def test_coefficients_identity():
    a = fp({1, 5, 9})
    assert bitset_coefficients(a, a) == (1.0, 1.0, 1.0)


def test_coefficients_disjoint():
    assert bitset_coefficients(fp({1, 2}), fp({3, 4})) == (0.0, 0.0, 0.0)


def test_coefficients_hand_derived_example():
    # |a∩b|=2, |a∪b|=4, |a|=2, |b|=4
    t, d, c = bitset_coefficients(fp({1, 2}), fp({1, 2, 3, 4}))
    assert abs(t - 0.5) < 1e-12
    assert abs(d - 2.0 / 3.0) < 1e-12
    assert abs(c - 1.0 / math.sqrt(2.0)) < 1e-12


def test_coefficients_empty_set_rule():
    assert bitset_coefficients(fp(set()), fp({1})) == (0.0, 0.0, 0.0)
    assert bitset_coefficients(fp({1}), fp(set())) == (0.0, 0.0, 0.0)
    assert bitset_coefficients(fp(set()), fp(set())) == (0.0, 0.0, 0.0)


def test_coefficients_nbits_mismatch():
    with pytest.raises(ValueError):
        bitset_coefficients(fp({1}, nbits=1024), fp({1}, nbits=2048))


@given(
    st.frozensets(st.integers(min_value=0, max_value=255), max_size=40),
    st.frozensets(st.integers(min_value=0, max_value=255), max_size=40),
)
def test_coefficient_bounds_symmetry_and_order(a_bits, b_bits):
    a, b = fp(a_bits, nbits=256), fp(b_bits, nbits=256)
    t, d, c = bitset_coefficients(a, b)
    assert bitset_coefficients(b, a) == (t, d, c)
    for value in (t, d, c):
        assert 0.0 <= value <= 1.0
    assert t <= d + 1e-15


def test_coefficient_properties_bulk():
    # high-volume randomized check of bounds, symmetry and tanimoto <= dice
    rng = random.Random(99)
    for _ in range(10_000):
        a = fp(frozenset(rng.sample(range(512), rng.randint(0, 24))), nbits=512)
        b = fp(frozenset(rng.sample(range(512), rng.randint(0, 24))), nbits=512)
        t, d, c = bitset_coefficients(a, b)
        assert bitset_coefficients(b, a) == (t, d, c)
        assert 0.0 <= t <= 1.0 and 0.0 <= d <= 1.0 and 0.0 <= c <= 1.0
        assert t <= d + 1e-15
