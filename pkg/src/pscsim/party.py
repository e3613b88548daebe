"""Party-side protocol logic.

A party owns the secrets: deposit values, coin randomness, and both
openings of every posted bit candidate.  The public side only ever
sees commitments, so the party also carries the bookkeeping needed to
recognize its own payout inside the evaluator's output later.

Per bit position the party posts two candidate commitments, one to 0
and one to 1, in a coin-flipped transmission order.  Whoever watches
the chain learns nothing about which is which; the evaluator, who gets
both openings privately, later picks the candidate matching the real
output bit.
"""

import hashlib
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from .contracts import ContractFunction
from .group import PrimeOrderGroup, length_prefixed
from .messages import (
    BitCandidates,
    CandidateSlot,
    FinalizeMessage,
    FreezeMessage,
    MpcAbort,
    MpcInput,
    MpcOutput,
)
from .pedersen import Opening, commit, quotient, recompose_bits, verify_opening
from .sigma import bnizk_prove, schnorr_verify
from .blockchain import Blockchain, bit_proof_context


@dataclass(frozen=True)
class FhatDescriptor:
    """What the evaluator is asked to run: contract, width, arity.

    Hashable so the evaluator can key its input ledger by
    (descriptor, parties).
    """

    contract_id: bytes
    code_digest: bytes
    ell: int
    arity: int


def contract_instance_id(code_digest: bytes, ell: int, parties) -> bytes:
    """Session identifier: hash of contract code, bit width, party list.

    Everyone computes this independently; agreement on the id implies
    agreement on the program, its parameters, and who participates.
    """
    blob = length_prefixed(b"psc-instance") + length_prefixed(code_digest)
    blob += ell.to_bytes(4, "big") + len(parties).to_bytes(4, "big")
    for p in parties:
        blob += length_prefixed(p.encode())
    return hashlib.sha256(blob).digest()


@dataclass
class BitSecret:
    """Openings of one candidate pair plus its transmission order."""

    c0: int
    s0: int
    c1: int
    s1: int
    first: int  # bit committed by the first transmitted candidate


@dataclass
class SecretEntry:
    value: int
    randomness: int
    aux: bytes
    bits: List[BitSecret] = field(default_factory=list)


class Party:
    """One protocol participant with private state and an own RNG."""

    def __init__(self, party_id: str, group: PrimeOrderGroup, rng):
        self.party_id = party_id
        self.group = group
        self.rng = rng
        self.identifiers = {}  # id -> (contract, parties, ell)
        self.secret_elems = {}  # id -> SecretEntry
        self.coins: List[Opening] = []
        self.computations = set()  # (descriptor, parties)

    # -- protocol algorithms ---------------------------------------------

    def u_create(self, contract: ContractFunction, parties, ell: int) -> bytes:
        """Register a session; idempotent for identical parameters."""
        parties = tuple(parties)
        if self.party_id not in parties:
            raise ValueError(f"{self.party_id} not in the party list")
        if len(set(parties)) != len(parties):
            raise ValueError("party list not distinct")
        if len(parties) != contract.arity:
            raise ValueError("party count does not match contract arity")
        cid = contract_instance_id(contract.code_digest, ell, parties)
        if cid not in self.identifiers:
            self.identifiers[cid] = (contract, parties, ell)
        return cid

    def u_freeze(
        self, contract_id: bytes, value: int, randomness: int, aux: bytes = b""
    ) -> FreezeMessage:
        """Build the freeze message and remember every opening.

        Candidate pairs are resampled until the two commitments differ;
        at toy group sizes accidental collisions are common and the
        chain rejects indistinct pairs.
        """
        contract, parties, ell = self.identifiers[contract_id]
        if not 0 <= value < (1 << ell):
            raise ValueError(f"value must be in [0, 2^{ell})")
        group = self.group
        coin = commit(group, value, randomness)
        my_index = parties.index(self.party_id)

        bits: List[BitSecret] = []
        slots = []
        for k in range(ell):
            while True:
                s0 = group.random_scalar(self.rng)
                s1 = group.random_scalar(self.rng)
                c0 = commit(group, 0, s0)
                c1 = commit(group, 1, s1)
                if c0 != c1:
                    break
            first = self.rng.getrandbits(1)
            ordered = ((c0, s0, 0), (c1, s1, 1)) if first == 0 else (
                (c1, s1, 1), (c0, s0, 0)
            )
            pair = []
            for slot_idx, (c, s, b) in enumerate(ordered):
                ctx = bit_proof_context(contract_id, my_index, k, slot_idx)
                proof = bnizk_prove(group, c, s, b, ctx, self.rng)
                pair.append(CandidateSlot(commitment=c, proof=proof))
            slots.append(tuple(pair))
            bits.append(BitSecret(c0=c0, s0=s0, c1=c1, s1=s1, first=first))

        self.secret_elems[contract_id] = SecretEntry(
            value=value, randomness=randomness, aux=aux, bits=bits
        )
        return FreezeMessage(
            contract_id=contract_id,
            parties=parties,
            coin=coin,
            slots=tuple(slots),
        )

    def u_prepare_compute(
        self, contract_id: bytes
    ) -> Tuple[FhatDescriptor, Tuple[str, ...], MpcInput]:
        """Package all secrets for the evaluator."""
        contract, parties, ell = self.identifiers[contract_id]
        entry = self.secret_elems[contract_id]
        descriptor = FhatDescriptor(
            contract_id=contract_id,
            code_digest=contract.code_digest,
            ell=ell,
            arity=len(parties),
        )
        x = MpcInput(
            value=entry.value,
            randomness=entry.randomness,
            aux=entry.aux,
            bits=tuple(
                BitCandidates(c0=b.c0, s0=b.s0, c1=b.c1, s1=b.s1) for b in entry.bits
            ),
        )
        return descriptor, parties, x

    def u_finalize(
        self, contract_id: bytes, y: MpcOutput, chain: Blockchain
    ) -> Optional[Tuple[FinalizeMessage, Opening]]:
        """Validate the evaluator's output and recover the own payout.

        Runs the same checks the chain will run (candidate membership
        and the balance proof) against public chain data; an output
        that would be rejected on-chain is dropped here and None is
        returned.  On success the recovered opening is banked and the
        finalize message is handed back for submission.
        """
        contract, parties, ell = self.identifiers[contract_id]
        entry = self.secret_elems[contract_id]
        group = self.group

        if len(y.selected) != len(parties) or any(
            len(row) != ell for row in y.selected
        ):
            return None
        try:
            # freeze records keep the original deposits even after payout
            records = [chain.freeze_records[(contract_id, p)] for p in parties]
        except KeyError:
            return None
        old_coins = [r.coin for r in records]
        for j in range(len(parties)):
            for k in range(ell):
                if y.selected[j][k] not in records[j].candidate_pairs[k]:
                    return None
        new_coins = [recompose_bits(group, row, ell) for row in y.selected]
        statement = quotient(
            group, group.product(new_coins), group.product(old_coins)
        )
        if not schnorr_verify(group, statement, y.proof, contract_id):
            return None

        my_index = parties.index(self.party_id)
        value = 0
        randomness = 0
        for k, bs in enumerate(entry.bits):
            sel = y.selected[my_index][k]
            if sel == bs.c0:
                s_k = bs.s0
            elif sel == bs.c1:
                value |= 1 << k
                s_k = bs.s1
            else:
                return None
            randomness = (randomness + (s_k << k)) % group.q
        opening = Opening(value=value, randomness=randomness)
        if not verify_opening(group, new_coins[my_index], opening):
            return None

        self.coins.append(opening)
        msg = FinalizeMessage(
            contract_id=contract_id,
            selected=y.selected,
            out=y.out,
            proof=y.proof,
        )
        return msg, opening

    # -- wrapper behaviors -------------------------------------------------

    def handle_freeze_request(
        self,
        contract: ContractFunction,
        parties,
        ell: int,
        value: int,
        aux: bytes = b"",
    ) -> FreezeMessage:
        """Environment entry point: create the session, freeze a value."""
        cid = self.u_create(contract, parties, ell)
        randomness = self.group.random_scalar(self.rng)
        return self.u_freeze(cid, value, randomness, aux)

    def handle_compute_request(self, contract_id: bytes):
        """Prepare the evaluator input and remember the open computation."""
        descriptor, parties, x = self.u_prepare_compute(contract_id)
        self.computations.add((descriptor, parties))
        return descriptor, parties, x

    def handle_mpc_output(
        self, descriptor: FhatDescriptor, parties, y, chain: Blockchain
    ) -> Optional[FinalizeMessage]:
        """Deliver an evaluator result; emits a finalize message or None.

        Results for computations this party never started are ignored,
        as are evaluator aborts and outputs that fail validation.
        """
        key = (descriptor, tuple(parties))
        if key not in self.computations:
            return None
        self.computations.discard(key)
        if isinstance(y, MpcAbort):
            return None
        result = self.u_finalize(descriptor.contract_id, y, chain)
        if result is None:
            return None
        return result[0]
