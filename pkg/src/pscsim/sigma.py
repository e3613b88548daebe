"""Non-interactive sigma protocols used by the protocol.

Two proof systems, both made non-interactive with a hash challenge
over the full first-move transcript:

 * Schnorr proof of knowledge of a discrete log base h.  The
   blockchain accepts a finalize message only if the quotient of
   output and input coins is proven to be a pure h-power, which is
   exactly the zero-sum condition on committed values.

 * A commit-to-bit proof showing a Pedersen commitment opens to 0 or
   1, without revealing which.  Freeze messages carry one per posted
   bit candidate, which doubles as the range proof for output values.

Challenges are domain-separated: each system hashes under its own tag
and a caller-supplied context string, so a proof can never be replayed
against another statement, contract, or slot.
"""

import logging
from dataclasses import dataclass

from .group import GroupElement, PrimeOrderGroup, Scalar, length_prefixed
from .pedersen import commit

log = logging.getLogger(__name__)

SCHNORR_TAG = b"psc/schnorr/v1"
BIT_TAG = b"psc/bit/v1"


class ChallengeOracle:
    """Default Fiat-Shamir oracle: hash the tagged transcript."""

    def challenge(
        self, group: PrimeOrderGroup, tag: bytes, transcript: bytes
    ) -> Scalar:
        return group.hash_to_scalar(tag, transcript)


class ProgrammableOracle(ChallengeOracle):
    """Test oracle whose answers can be pinned per transcript.

    Needed by the zero-knowledge simulator, which picks the response
    first and must then force the matching challenge.  Unprogrammed
    queries fall through to the real hash.
    """

    def __init__(self):
        self._table = {}

    def program(
        self, group: PrimeOrderGroup, tag: bytes, transcript: bytes, e: Scalar
    ) -> None:
        self._table[(tag, transcript)] = e

    def challenge(
        self, group: PrimeOrderGroup, tag: bytes, transcript: bytes
    ) -> Scalar:
        hit = self._table.get((tag, transcript))
        if hit is not None:
            return hit
        return super().challenge(group, tag, transcript)


_DEFAULT_ORACLE = ChallengeOracle()


# -- Schnorr proof of discrete log knowledge --------------------------


@dataclass(frozen=True)
class SchnorrProof:
    """(t, z): nonce commitment and response."""

    nonce_commitment: GroupElement
    response: Scalar

    def to_bytes(self, group: PrimeOrderGroup) -> bytes:
        return group.encode_element(self.nonce_commitment) + group.encode_scalar(
            self.response
        )

    @classmethod
    def from_bytes(cls, group: PrimeOrderGroup, data: bytes) -> "SchnorrProof":
        n = group.encoding_len
        if len(data) != n + group.scalar_len:
            raise ValueError("bad Schnorr proof length")
        return cls(
            nonce_commitment=group.decode_element(data[:n]),
            response=group.decode_scalar(data[n:]),
        )


def _schnorr_transcript(
    group: PrimeOrderGroup,
    statement: GroupElement,
    base: GroupElement,
    nonce_commitment: GroupElement,
    context: bytes,
) -> bytes:
    return (
        length_prefixed(context)
        + group.encode_element(statement)
        + group.encode_element(base)
        + group.encode_element(nonce_commitment)
    )


def schnorr_prove(
    group: PrimeOrderGroup,
    statement: GroupElement,
    witness: Scalar,
    context: bytes,
    rng,
    base: GroupElement = None,
    oracle: ChallengeOracle = _DEFAULT_ORACLE,
) -> SchnorrProof:
    """Prove knowledge of w with base^w = statement.

    The default base is h, matching the balance proof where the
    statement is a coin quotient and the witness is pure randomness.
    The witness is used as given, never checked: a wrong witness
    produces a proof that simply fails verification, which is how a
    non-conserving evaluation gets caught downstream.
    """
    if base is None:
        base = group.h
    w = group.random_scalar(rng)
    t = group.exp(base, w)
    e = oracle.challenge(
        group, SCHNORR_TAG, _schnorr_transcript(group, statement, base, t, context)
    )
    z = group.scalar_add(w, group.scalar_mul(e, witness))
    return SchnorrProof(nonce_commitment=t, response=z)


def schnorr_verify(
    group: PrimeOrderGroup,
    statement: GroupElement,
    proof: SchnorrProof,
    context: bytes,
    base: GroupElement = None,
    oracle: ChallengeOracle = _DEFAULT_ORACLE,
) -> bool:
    """Check base^z = t * statement^e.  Malformed inputs just fail."""
    if base is None:
        base = group.h
    if not (
        group.is_member(statement)
        and group.is_member(base)
        and group.is_member(proof.nonce_commitment)
        and group.is_scalar(proof.response)
    ):
        log.debug("schnorr proof malformed for context %r", context)
        return False
    e = oracle.challenge(
        group,
        SCHNORR_TAG,
        _schnorr_transcript(group, statement, base, proof.nonce_commitment, context),
    )
    lhs = group.exp(base, proof.response)
    rhs = group.mul(proof.nonce_commitment, group.exp(statement, e))
    return lhs == rhs


def schnorr_simulate(
    group: PrimeOrderGroup,
    statement: GroupElement,
    context: bytes,
    rng,
    oracle: ProgrammableOracle,
    base: GroupElement = None,
) -> SchnorrProof:
    """Produce an accepting proof without the witness (test helper).

    Samples (z, e) first and solves t = base^z / statement^e, then
    programs the oracle to answer e on the resulting transcript.  Only
    works against a ProgrammableOracle; refusing anything else keeps
    the simulator out of production paths.
    """
    if not isinstance(oracle, ProgrammableOracle):
        raise RuntimeError("simulation requires a programmable oracle")
    if base is None:
        base = group.h
    z = group.random_scalar(rng)
    e = group.random_scalar(rng)
    t = group.div(group.exp(base, z), group.exp(statement, e))
    oracle.program(
        group, SCHNORR_TAG, _schnorr_transcript(group, statement, base, t, context), e
    )
    return SchnorrProof(nonce_commitment=t, response=z)


# -- commit-to-bit proof -----------------------------------------------


@dataclass(frozen=True)
class BitProof:
    """First move (c_a, c_b) and responses (f, z_a, z_b)."""

    c_a: GroupElement
    c_b: GroupElement
    f: Scalar
    z_a: Scalar
    z_b: Scalar

    def to_bytes(self, group: PrimeOrderGroup) -> bytes:
        return (
            group.encode_element(self.c_a)
            + group.encode_element(self.c_b)
            + group.encode_scalar(self.f)
            + group.encode_scalar(self.z_a)
            + group.encode_scalar(self.z_b)
        )

    @classmethod
    def from_bytes(cls, group: PrimeOrderGroup, data: bytes) -> "BitProof":
        n, m = group.encoding_len, group.scalar_len
        if len(data) != 2 * n + 3 * m:
            raise ValueError("bad bit proof length")
        return cls(
            c_a=group.decode_element(data[:n]),
            c_b=group.decode_element(data[n : 2 * n]),
            f=group.decode_scalar(data[2 * n : 2 * n + m]),
            z_a=group.decode_scalar(data[2 * n + m : 2 * n + 2 * m]),
            z_b=group.decode_scalar(data[2 * n + 2 * m :]),
        )


def _bit_transcript(
    group: PrimeOrderGroup,
    c: GroupElement,
    c_a: GroupElement,
    c_b: GroupElement,
    context: bytes,
) -> bytes:
    return (
        length_prefixed(context)
        + group.encode_element(c)
        + group.encode_element(c_a)
        + group.encode_element(c_b)
    )


def bnizk_prove(
    group: PrimeOrderGroup,
    c: GroupElement,
    randomness: Scalar,
    bit: int,
    context: bytes,
    rng,
    oracle: ChallengeOracle = _DEFAULT_ORACLE,
) -> BitProof:
    """Prove c = Com(bit; randomness) with bit in {0, 1}.

    Auxiliary commitments c_a = Com(a; s) and c_b = Com(a*bit; t) tie
    the responses together so that the verification equations force
    bit*(bit-1) = 0.  The prover is not trusted here: a wrong opening
    yields a proof the verifier rejects, it is not detected early.
    """
    if bit not in (0, 1):
        raise ValueError("bit must be 0 or 1")
    a = group.random_scalar(rng)
    s = group.random_scalar(rng)
    t = group.random_scalar(rng)
    c_a = commit(group, a, s)
    c_b = commit(group, a * bit, t)
    e = oracle.challenge(group, BIT_TAG, _bit_transcript(group, c, c_a, c_b, context))
    f = group.scalar_add(group.scalar_mul(bit, e), a)
    z_a = group.scalar_add(group.scalar_mul(randomness, e), s)
    z_b = group.scalar_add(
        group.scalar_mul(randomness, group.scalar_sub(e, f)), t
    )
    return BitProof(c_a=c_a, c_b=c_b, f=f, z_a=z_a, z_b=z_b)


def bnizk_verify(
    group: PrimeOrderGroup,
    c: GroupElement,
    proof: BitProof,
    context: bytes,
    oracle: ChallengeOracle = _DEFAULT_ORACLE,
) -> bool:
    """Check Com(f; z_a) = c^e * c_a and Com(0; z_b) = c^(e-f) * c_b."""
    if not (
        group.is_member(c)
        and group.is_member(proof.c_a)
        and group.is_member(proof.c_b)
        and group.is_scalar(proof.f)
        and group.is_scalar(proof.z_a)
        and group.is_scalar(proof.z_b)
    ):
        log.debug("bit proof malformed for context %r", context)
        return False
    e = oracle.challenge(
        group, BIT_TAG, _bit_transcript(group, c, proof.c_a, proof.c_b, context)
    )
    first = commit(group, proof.f, proof.z_a) == group.mul(
        group.exp(c, e), proof.c_a
    )
    if not first:
        return False
    second = commit(group, 0, proof.z_b) == group.mul(
        group.exp(c, group.scalar_sub(e, proof.f)), proof.c_b
    )
    return second
