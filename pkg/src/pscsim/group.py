"""Prime-order multiplicative group arithmetic.

All protocol algebra runs in a subgroup of order q inside Z_p^* where
p = q*r + 1 for primes p, q.  Elements are plain Python ints (residues
mod p), scalars are ints reduced mod q.  gmpy2 backs the modular
exponentiations; everything crossing a module boundary stays an int.

Two parameter sets ship with the library: a production set with a
512-bit p and 256-bit q, derived from nothing-up-my-sleeve seeds, and
a tiny 23-element toy set used by tests and oracle cross-checks.  The
toy set is flagged ``insecure_test_group`` and refuses to pretend
otherwise.
"""

import hashlib
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import gmpy2

Scalar = int
GroupElement = int


class GroupError(ValueError):
    """Raised for parameter or membership violations."""


class EncodingError(GroupError):
    """Raised when a byte string is not a canonical encoding."""


def length_prefixed(data: bytes) -> bytes:
    """4-byte big-endian length followed by the payload."""
    return len(data).to_bytes(4, "big") + data


@dataclass(frozen=True)
class PrimeOrderGroup:
    """Subgroup of order ``q`` in Z_p^* with independent generators g, h.

    ``encoding_len`` and ``scalar_len`` fix the canonical big-endian
    widths for elements and scalars.  ``insecure_test_group`` marks
    parameter sets that are only safe for tests.
    """

    name: str
    p: int
    q: int
    g: GroupElement
    h: GroupElement
    encoding_len: int
    scalar_len: int
    insecure_test_group: bool = False

    def __post_init__(self):
        if (self.p - 1) % self.q != 0:
            raise GroupError("q must divide p-1")
        for gen in (self.g, self.h):
            if not self.is_member(gen) or gen == 1:
                raise GroupError("generator outside the order-q subgroup")
        if self.g == self.h:
            raise GroupError("generators must be distinct")
        if self.p.bit_length() > 8 * self.encoding_len:
            raise GroupError("encoding_len too small for p")
        if self.q.bit_length() > 8 * self.scalar_len:
            raise GroupError("scalar_len too small for q")

    # -- arithmetic ---------------------------------------------------

    @property
    def identity(self) -> GroupElement:
        return 1

    def exp(self, base: GroupElement, exponent: int) -> GroupElement:
        """base^exponent mod p.  Negative exponents are reduced mod q."""
        return int(gmpy2.powmod(base, exponent % self.q, self.p))

    def mul(self, a: GroupElement, b: GroupElement) -> GroupElement:
        return a * b % self.p

    def div(self, a: GroupElement, b: GroupElement) -> GroupElement:
        return a * int(gmpy2.invert(b, self.p)) % self.p

    def inv(self, a: GroupElement) -> GroupElement:
        return int(gmpy2.invert(a, self.p))

    def product(self, elems: Iterable[GroupElement]) -> GroupElement:
        acc = 1
        for x in elems:
            acc = acc * x % self.p
        return acc

    def is_member(self, x) -> bool:
        """True iff x is in the order-q subgroup (identity included)."""
        if not isinstance(x, int) or isinstance(x, bool):
            return False
        if not 1 <= x < self.p:
            return False
        return gmpy2.powmod(x, self.q, self.p) == 1

    # -- scalars ------------------------------------------------------

    def scalar(self, x: int) -> Scalar:
        return x % self.q

    def scalar_add(self, a: Scalar, b: Scalar) -> Scalar:
        return (a + b) % self.q

    def scalar_sub(self, a: Scalar, b: Scalar) -> Scalar:
        return (a - b) % self.q

    def scalar_mul(self, a: Scalar, b: Scalar) -> Scalar:
        return a * b % self.q

    def is_scalar(self, x) -> bool:
        return isinstance(x, int) and not isinstance(x, bool) and 0 <= x < self.q

    def random_scalar(self, rng) -> Scalar:
        """Uniform scalar drawn from a random.Random-like source."""
        return rng.randrange(self.q)

    def hash_to_scalar(self, tag: bytes, transcript: bytes) -> Scalar:
        """SHA-512 of the tagged transcript, reduced mod q.

        The tag is length-prefixed so distinct domains can never
        collide by concatenation.
        """
        digest = hashlib.sha512(length_prefixed(tag) + transcript).digest()
        return int.from_bytes(digest, "big") % self.q

    # -- canonical encodings -------------------------------------------

    def encode_element(self, x: GroupElement) -> bytes:
        # range check only: encoding is for values built by group ops,
        # the full membership test guards the decode direction
        if not isinstance(x, int) or isinstance(x, bool) or not 1 <= x < self.p:
            raise EncodingError("not a group residue")
        return x.to_bytes(self.encoding_len, "big")

    def decode_element(self, data: bytes) -> GroupElement:
        if len(data) != self.encoding_len:
            raise EncodingError(
                f"element must be {self.encoding_len} bytes, got {len(data)}"
            )
        x = int.from_bytes(data, "big")
        if not self.is_member(x):
            raise EncodingError("decoded value outside the subgroup")
        return x

    def encode_scalar(self, s: Scalar) -> bytes:
        if not self.is_scalar(s):
            raise EncodingError("scalar out of range")
        return s.to_bytes(self.scalar_len, "big")

    def decode_scalar(self, data: bytes) -> Scalar:
        if len(data) != self.scalar_len:
            raise EncodingError(
                f"scalar must be {self.scalar_len} bytes, got {len(data)}"
            )
        s = int.from_bytes(data, "big")
        if s >= self.q:
            raise EncodingError("scalar not reduced mod q")
        return s


def derive_second_generator(p: int, q: int, label: bytes, max_tries: int = 64) -> int:
    """Hash-to-group: map a label into the order-q subgroup.

    u = SHA-512(label || counter) mod p, candidate = u^((p-1)/q) mod p;
    the counter increments until the candidate is not the identity.
    Nobody learns a discrete log relation to any other generator this
    way, which is what Pedersen binding needs.
    """
    cofactor = (p - 1) // q
    for ctr in range(max_tries):
        u = int.from_bytes(
            hashlib.sha512(label + ctr.to_bytes(4, "big")).digest(), "big"
        ) % p
        candidate = int(gmpy2.powmod(u, cofactor, p))
        if candidate != 1:
            return candidate
    raise GroupError("no generator found within max_tries")


# 512-bit p = q*r + 1 with 256-bit prime q.  Derived deterministically:
# q is the next prime at or above SHA-256("psc-sim group v1: subgroup
# order seed") with the top bit forced, r similarly from the cofactor
# seed, then r is stepped in increments of 2 until q*r + 1 is prime.
# scripts/gen_group_params.py reproduces both numbers from scratch.
_P_HEX = (
    "a2754bdf5c8157a081282785957c8a675f105d4ab9accd4202658eb7393c1817"
    "8b9552223bc7a56b6b31fc31c4fcad7aa41d8f2b4186acf185c3db4c52c10d59"
)
_Q_HEX = "fc5e09b995ceb623d3c0821450a019b7fabe84c39284a3e0c63a76dace640a0d"

SECOND_GENERATOR_LABEL = b"psc-sim group v1: second generator"


@lru_cache(maxsize=None)
def production_group() -> PrimeOrderGroup:
    """The default 512/256-bit parameter set.

    g = 2^((p-1)/q) mod p, h by hash-to-group, so neither generator
    has a known discrete log relative to the other.
    """
    p = int(_P_HEX, 16)
    q = int(_Q_HEX, 16)
    cofactor = (p - 1) // q
    g = int(gmpy2.powmod(2, cofactor, p))
    h = derive_second_generator(p, q, SECOND_GENERATOR_LABEL)
    return PrimeOrderGroup(
        name="psc-512",
        p=p,
        q=q,
        g=g,
        h=h,
        encoding_len=64,
        scalar_len=32,
    )


@lru_cache(maxsize=None)
def toy_group() -> PrimeOrderGroup:
    """Order-11 subgroup of Z_23^*: small enough to enumerate by hand.

    Test-only.  Every security property is void at this size.
    """
    return PrimeOrderGroup(
        name="toy23",
        p=23,
        q=11,
        g=4,
        h=8,
        encoding_len=1,
        scalar_len=1,
        insecure_test_group=True,
    )


GROUP_NAMES = ("production", "toy-insecure")


def get_group(name: str) -> PrimeOrderGroup:
    """Look up a parameter set by configuration name."""
    if name == "production":
        return production_group()
    if name in ("toy-insecure", "toy23"):
        return toy_group()
    raise GroupError(f"unknown group {name!r}")
