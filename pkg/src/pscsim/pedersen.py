"""Pedersen commitments and the homomorphic coin algebra.

Com(x; r) = g^x * h^r.  Perfectly hiding, binding under discrete log
as long as nobody knows log_g(h).  The simulator leans on two facts:

 * products of commitments commit to sums, so the blockchain can check
   a zero-sum constraint without ever seeing values, and
 * a coin committed bitwise can be reassembled as
   prod_k (bit commitment_k)^(2^k).
"""

from dataclasses import dataclass
from typing import Iterable, Sequence

from .group import GroupElement, PrimeOrderGroup, Scalar

Commitment = GroupElement


@dataclass(frozen=True)
class Opening:
    """(value, randomness) pair that opens a commitment."""

    value: int
    randomness: Scalar


def commit(group: PrimeOrderGroup, value: int, randomness: Scalar) -> Commitment:
    """Com(value; randomness) = g^value * h^randomness."""
    return group.mul(group.exp(group.g, value), group.exp(group.h, randomness))


def verify_opening(group: PrimeOrderGroup, c: Commitment, opening: Opening) -> bool:
    if not group.is_member(c):
        return False
    return commit(group, opening.value, opening.randomness) == c


def combine(group: PrimeOrderGroup, commitments: Iterable[Commitment]) -> Commitment:
    """Product of commitments; commits to the sum of the openings."""
    return group.product(commitments)


def quotient(group: PrimeOrderGroup, a: Commitment, b: Commitment) -> Commitment:
    """a / b; commits to the difference of the openings."""
    return group.div(a, b)


def recompose_bits(
    group: PrimeOrderGroup, bit_commitments: Sequence[Commitment], ell: int
) -> Commitment:
    """prod_k c_k^(2^k) for exactly ``ell`` bit commitments.

    If every c_k opens to (b_k, s_k) the result opens to
    (sum b_k 2^k, sum s_k 2^k mod q).
    """
    if len(bit_commitments) != ell:
        raise ValueError(f"expected {ell} bit commitments, got {len(bit_commitments)}")
    acc = group.identity
    for k, c in enumerate(bit_commitments):
        acc = group.mul(acc, group.exp(c, 1 << k))
    return acc


def validate_bit_width(group: PrimeOrderGroup, ell: int, n_parties: int) -> None:
    """Reject widths where value sums could wrap mod q.

    The zero-sum check is an equation mod q; it only reflects integer
    equality while n_parties * 2^ell stays below q.
    """
    if ell < 1:
        raise ValueError("bit width must be at least 1")
    if n_parties < 1:
        raise ValueError("need at least one party")
    if n_parties * (1 << ell) >= group.q:
        raise ValueError(
            f"n*2^ell must stay below the group order "
            f"(n={n_parties}, ell={ell}, q has {group.q.bit_length()} bits)"
        )
