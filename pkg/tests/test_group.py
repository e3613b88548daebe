import random

import pytest
from hypothesis import given, settings, strategies as st

from pscsim.group import (
    EncodingError,
    GroupError,
    PrimeOrderGroup,
    derive_second_generator,
    get_group,
    production_group,
    toy_group,
)
from oracles import naive_inverse, naive_mod_exp

# the order-11 subgroup of Z_23^*: the quadratic residues
TOY_SUBGROUP = {1, 2, 3, 4, 6, 8, 9, 12, 13, 16, 18}


def test_toy_parameters(toy):
    assert (toy.p, toy.q, toy.g, toy.h) == (23, 11, 4, 8)
    assert toy.insecure_test_group
    assert toy.encoding_len == 1 and toy.scalar_len == 1


def test_toy_membership_exhaustive(toy):
    members = {x for x in range(1, 23) if toy.is_member(x)}
    assert members == TOY_SUBGROUP
    assert not toy.is_member(0)
    assert not toy.is_member(23)
    assert not toy.is_member(-4)
    assert not toy.is_member(True)
    assert not toy.is_member("4")


def test_toy_fixed_values(toy):
    assert toy.exp(toy.g, 3) == 18
    assert toy.mul(12, 13) == 18
    assert toy.div(18, 13) == 12
    assert toy.inv(2) == 12  # 2 * 12 = 24 = 1 mod 23


def test_exp_reduces_exponent_mod_q(toy):
    for base in (2, 4, 8):
        assert toy.exp(base, 13) == toy.exp(base, 2)
        assert toy.exp(base, -1) == toy.exp(base, 10)
        assert toy.exp(base, 0) == 1


def test_production_parameters_structure(prod):
    assert prod.p.bit_length() == 512
    assert prod.q.bit_length() == 256
    assert (prod.p - 1) % prod.q == 0
    assert not prod.insecure_test_group
    # generators really have order q
    assert prod.exp(prod.g, prod.q - 1) != 1
    assert prod.is_member(prod.g) and prod.is_member(prod.h)
    assert prod.g != prod.h


def test_production_matches_naive_oracle(prod, rng):
    for _ in range(5):
        e = rng.randrange(prod.q)
        assert prod.exp(prod.g, e) == naive_mod_exp(prod.g, e, prod.p)
    x = prod.exp(prod.h, 12345)
    assert prod.inv(x) == naive_inverse(x, prod.p)


def test_get_group_names():
    assert get_group("production") is production_group()
    assert get_group("toy-insecure") is toy_group()
    with pytest.raises(GroupError):
        get_group("nope")


def test_bad_parameters_rejected():
    with pytest.raises(GroupError):
        PrimeOrderGroup("x", p=23, q=7, g=4, h=8, encoding_len=1, scalar_len=1)
    with pytest.raises(GroupError):  # 5 is not in the subgroup
        PrimeOrderGroup("x", p=23, q=11, g=5, h=8, encoding_len=1, scalar_len=1)
    with pytest.raises(GroupError):  # identical generators
        PrimeOrderGroup("x", p=23, q=11, g=4, h=4, encoding_len=1, scalar_len=1)
    with pytest.raises(GroupError):  # encoding too narrow
        PrimeOrderGroup("x", p=23, q=11, g=4, h=8, encoding_len=0, scalar_len=1)


def test_second_generator_derivation_is_deterministic(toy):
    a = derive_second_generator(toy.p, toy.q, b"label one")
    b = derive_second_generator(toy.p, toy.q, b"label one")
    c = derive_second_generator(toy.p, toy.q, b"label two")
    assert a == b
    assert a in TOY_SUBGROUP and c in TOY_SUBGROUP
    assert a != 1 and c != 1


def test_element_encoding_roundtrip_toy(toy):
    for x in TOY_SUBGROUP:
        data = toy.encode_element(x)
        assert len(data) == 1
        assert toy.decode_element(data) == x


def test_decode_rejects_non_members(toy):
    with pytest.raises(EncodingError):
        toy.decode_element(bytes([5]))  # in range, not in subgroup
    with pytest.raises(EncodingError):
        toy.decode_element(bytes([0]))
    with pytest.raises(EncodingError):
        toy.decode_element(b"\x01\x02")  # wrong width


def test_scalar_encoding(toy):
    assert toy.decode_scalar(toy.encode_scalar(10)) == 10
    with pytest.raises(EncodingError):
        toy.encode_scalar(11)
    with pytest.raises(EncodingError):
        toy.decode_scalar(bytes([11]))


def test_hash_to_scalar_domain_separation(prod):
    a = prod.hash_to_scalar(b"tag-a", b"data")
    b = prod.hash_to_scalar(b"tag-b", b"data")
    c = prod.hash_to_scalar(b"tag-a", b"data2")
    assert a != b and a != c
    assert prod.hash_to_scalar(b"tag-a", b"data") == a
    # length prefixing: tag/transcript boundary cannot be shifted
    assert prod.hash_to_scalar(b"ab", b"c") != prod.hash_to_scalar(b"a", b"bc")


@given(st.integers(min_value=0, max_value=10), st.integers(min_value=0, max_value=10))
def test_scalar_arithmetic_matches_ints(a, b):
    toy = toy_group()
    assert toy.scalar_add(a, b) == (a + b) % 11
    assert toy.scalar_sub(a, b) == (a - b) % 11
    assert toy.scalar_mul(a, b) == (a * b) % 11


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10), st.integers(min_value=0, max_value=10))
def test_exp_homomorphism_toy(e1, e2):
    toy = toy_group()
    lhs = toy.mul(toy.exp(toy.g, e1), toy.exp(toy.g, e2))
    assert lhs == toy.exp(toy.g, (e1 + e2) % 11)


def test_random_scalar_range(prod):
    rng = random.Random(1)
    draws = [prod.random_scalar(rng) for _ in range(50)]
    assert all(0 <= d < prod.q for d in draws)
    assert len(set(draws)) > 1
