"""Wire formats for protocol messages.

Every message has one canonical byte encoding: fixed-width big-endian
group elements and scalars, 4-byte length prefixes for variable parts,
and a leading kind byte.  Transcripts, replays, and hashes all rely on
this encoding being unique, so decoders reject trailing bytes, padding
tricks, and values outside the subgroup.

A JSON mirror (hex fields) exists for each on-chain message so that
transcript files stay human-readable next to the authoritative bytes.
"""

from dataclasses import dataclass
from typing import Optional, Tuple, Union

from .group import PrimeOrderGroup, length_prefixed
from .sigma import BitProof, SchnorrProof

KIND_FREEZE = 1
KIND_FINALIZE = 2
KIND_MPC_INPUT = 3
KIND_MPC_OUTPUT = 4
KIND_MPC_ABORT = 5

_MAX_PARTIES = 1 << 16
_MAX_BITS = 1 << 16


@dataclass(frozen=True)
class CandidateSlot:
    """One posted bit candidate: its commitment and membership proof."""

    commitment: int
    proof: BitProof


@dataclass(frozen=True)
class FreezeMessage:
    contract_id: bytes
    parties: Tuple[str, ...]
    coin: int
    slots: Tuple[Tuple[CandidateSlot, CandidateSlot], ...]

    @property
    def ell(self) -> int:
        return len(self.slots)


@dataclass(frozen=True)
class FinalizeMessage:
    contract_id: bytes
    selected: Tuple[Tuple[int, ...], ...]
    out: bytes
    proof: SchnorrProof


@dataclass(frozen=True)
class BitCandidates:
    """Both openings of one bit position, sent privately to the evaluator."""

    c0: int
    s0: int
    c1: int
    s1: int


@dataclass(frozen=True)
class MpcInput:
    value: int
    randomness: int
    aux: bytes
    bits: Tuple[BitCandidates, ...]


@dataclass(frozen=True)
class MpcOutput:
    selected: Tuple[Tuple[int, ...], ...]
    proof: SchnorrProof
    out: bytes


@dataclass(frozen=True)
class MpcAbort:
    reason: str


Message = Union[FreezeMessage, FinalizeMessage, MpcInput, MpcOutput, MpcAbort]


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if n < 0 or self.pos + n > len(self.data):
            raise ValueError("truncated message")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def u32(self) -> int:
        return int.from_bytes(self.take(4), "big")

    def blob(self) -> bytes:
        return self.take(self.u32())

    def element(self, group: PrimeOrderGroup) -> int:
        return group.decode_element(self.take(group.encoding_len))

    def scalar(self, group: PrimeOrderGroup) -> int:
        return group.decode_scalar(self.take(group.scalar_len))

    def finish(self) -> None:
        if self.pos != len(self.data):
            raise ValueError("trailing bytes after message")


def _encode_matrix(group, rows) -> bytes:
    parts = [len(rows).to_bytes(4, "big")]
    ell = len(rows[0]) if rows else 0
    parts.append(ell.to_bytes(4, "big"))
    for row in rows:
        if len(row) != ell:
            raise ValueError("ragged commitment matrix")
        for c in row:
            parts.append(group.encode_element(c))
    return b"".join(parts)


def _decode_matrix(group, r: _Reader):
    n = r.u32()
    ell = r.u32()
    if n > _MAX_PARTIES or ell > _MAX_BITS:
        raise ValueError("commitment matrix dimensions out of range")
    return tuple(
        tuple(r.element(group) for _ in range(ell)) for _ in range(n)
    )


def encode_message(group: PrimeOrderGroup, msg: Message) -> bytes:
    if isinstance(msg, FreezeMessage):
        parts = [bytes([KIND_FREEZE]), length_prefixed(msg.contract_id)]
        parts.append(len(msg.parties).to_bytes(4, "big"))
        for name in msg.parties:
            parts.append(length_prefixed(name.encode()))
        parts.append(group.encode_element(msg.coin))
        parts.append(len(msg.slots).to_bytes(4, "big"))
        for pair in msg.slots:
            for slot in pair:
                parts.append(group.encode_element(slot.commitment))
                parts.append(slot.proof.to_bytes(group))
        return b"".join(parts)
    if isinstance(msg, FinalizeMessage):
        return (
            bytes([KIND_FINALIZE])
            + length_prefixed(msg.contract_id)
            + _encode_matrix(group, msg.selected)
            + length_prefixed(msg.out)
            + msg.proof.to_bytes(group)
        )
    if isinstance(msg, MpcInput):
        parts = [
            bytes([KIND_MPC_INPUT]),
            group.encode_scalar(msg.value),
            group.encode_scalar(msg.randomness),
            length_prefixed(msg.aux),
            len(msg.bits).to_bytes(4, "big"),
        ]
        for b in msg.bits:
            parts.append(group.encode_element(b.c0))
            parts.append(group.encode_scalar(b.s0))
            parts.append(group.encode_element(b.c1))
            parts.append(group.encode_scalar(b.s1))
        return b"".join(parts)
    if isinstance(msg, MpcOutput):
        return (
            bytes([KIND_MPC_OUTPUT])
            + _encode_matrix(group, msg.selected)
            + length_prefixed(msg.out)
            + msg.proof.to_bytes(group)
        )
    if isinstance(msg, MpcAbort):
        return bytes([KIND_MPC_ABORT]) + length_prefixed(msg.reason.encode())
    raise TypeError(f"not a protocol message: {type(msg).__name__}")


def _bitproof_from(group, r: _Reader) -> BitProof:
    raw = r.take(2 * group.encoding_len + 3 * group.scalar_len)
    return BitProof.from_bytes(group, raw)


def decode_message(group: PrimeOrderGroup, data: bytes) -> Message:
    """Parse one canonical message; raises ValueError on any defect."""
    r = _Reader(data)
    kind = r.u8()
    if kind == KIND_FREEZE:
        contract_id = r.blob()
        n = r.u32()
        if n > _MAX_PARTIES:
            raise ValueError("party count out of range")
        parties = tuple(r.blob().decode() for _ in range(n))
        coin = r.element(group)
        ell = r.u32()
        if ell > _MAX_BITS:
            raise ValueError("bit count out of range")
        slots = tuple(
            (
                CandidateSlot(r.element(group), _bitproof_from(group, r)),
                CandidateSlot(r.element(group), _bitproof_from(group, r)),
            )
            for _ in range(ell)
        )
        r.finish()
        return FreezeMessage(contract_id, parties, coin, slots)
    if kind == KIND_FINALIZE:
        contract_id = r.blob()
        selected = _decode_matrix(group, r)
        out = r.blob()
        proof = SchnorrProof.from_bytes(
            group, r.take(group.encoding_len + group.scalar_len)
        )
        r.finish()
        return FinalizeMessage(contract_id, selected, out, proof)
    if kind == KIND_MPC_INPUT:
        value = r.scalar(group)
        randomness = r.scalar(group)
        aux = r.blob()
        nbits = r.u32()
        if nbits > _MAX_BITS:
            raise ValueError("bit count out of range")
        bits = tuple(
            BitCandidates(
                c0=r.element(group),
                s0=r.scalar(group),
                c1=r.element(group),
                s1=r.scalar(group),
            )
            for _ in range(nbits)
        )
        r.finish()
        return MpcInput(value, randomness, aux, bits)
    if kind == KIND_MPC_OUTPUT:
        selected = _decode_matrix(group, r)
        out = r.blob()
        proof = SchnorrProof.from_bytes(
            group, r.take(group.encoding_len + group.scalar_len)
        )
        r.finish()
        return MpcOutput(selected, proof, out)
    if kind == KIND_MPC_ABORT:
        reason = r.blob().decode()
        r.finish()
        return MpcAbort(reason)
    raise ValueError(f"unknown message kind {kind}")


# -- JSON mirrors for on-chain messages --------------------------------


def _proof_json(group, proof: SchnorrProof) -> dict:
    return {
        "t": group.encode_element(proof.nonce_commitment).hex(),
        "z": group.encode_scalar(proof.response).hex(),
    }


def _bitproof_json(group, proof: BitProof) -> dict:
    return {
        "c_a": group.encode_element(proof.c_a).hex(),
        "c_b": group.encode_element(proof.c_b).hex(),
        "f": group.encode_scalar(proof.f).hex(),
        "z_a": group.encode_scalar(proof.z_a).hex(),
        "z_b": group.encode_scalar(proof.z_b).hex(),
    }


def message_to_json(group: PrimeOrderGroup, msg: Message) -> dict:
    """Readable mirror of an on-chain message, all group data in hex."""
    if isinstance(msg, FreezeMessage):
        return {
            "kind": "freeze",
            "contract_id": msg.contract_id.hex(),
            "parties": list(msg.parties),
            "coin": group.encode_element(msg.coin).hex(),
            "slots": [
                [
                    {
                        "commitment": group.encode_element(s.commitment).hex(),
                        "proof": _bitproof_json(group, s.proof),
                    }
                    for s in pair
                ]
                for pair in msg.slots
            ],
        }
    if isinstance(msg, FinalizeMessage):
        return {
            "kind": "finalize",
            "contract_id": msg.contract_id.hex(),
            "selected": [
                [group.encode_element(c).hex() for c in row] for row in msg.selected
            ],
            "out": msg.out.hex(),
            "proof": _proof_json(group, msg.proof),
        }
    raise TypeError("only on-chain messages have a JSON mirror")
