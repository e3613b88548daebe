"""Simulated blockchain: the public, append-only side of the protocol.

The chain never sees a value or a random coin.  It keeps three tables:

 * Contracts: id -> (party set, who froze, phase)
 * FrozenCoins: (id, party) -> current committed coin
 * FreezeRecords: (id, party) -> original coin plus the posted bit
   candidate pairs, kept for audits and offline verification

Message handling is transactional: a rejected message changes nothing
except the snapshot log, and every handled message appends a snapshot
with a hash of the post-message state.  Rejections carry stable reason
codes so tests and operators can tell classes of failure apart.
"""

import copy
import hashlib
import json
import threading
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .group import PrimeOrderGroup
from .messages import FinalizeMessage, FreezeMessage
from .pedersen import quotient, recompose_bits
from .sigma import bnizk_verify, schnorr_verify

PHASE_FREEZE = "freeze"
PHASE_COMPUTE = "compute"
PHASE_FINALIZED = "finalized"

ACCEPTED = "accepted"
REJECT_MALFORMED = "malformed-message"
REJECT_SENDER_NOT_IN_PARTIES = "sender-not-in-parties"
REJECT_PARTY_SET_MISMATCH = "party-set-mismatch"
REJECT_NOT_IN_FREEZE_PHASE = "not-in-freeze-phase"
REJECT_ALREADY_FROZEN = "already-frozen"
REJECT_BIT_PROOF_INVALID = "bit-proof-invalid"
REJECT_UNKNOWN_CONTRACT = "unknown-contract"
REJECT_NOT_IN_COMPUTE_PHASE = "not-in-compute-phase"
REJECT_CANDIDATE_NOT_IN_SET = "candidate-not-in-set"
REJECT_SCHNORR_FAILED = "schnorr-failed"

REASON_CODES = (
    ACCEPTED,
    REJECT_MALFORMED,
    REJECT_SENDER_NOT_IN_PARTIES,
    REJECT_PARTY_SET_MISMATCH,
    REJECT_NOT_IN_FREEZE_PHASE,
    REJECT_ALREADY_FROZEN,
    REJECT_BIT_PROOF_INVALID,
    REJECT_UNKNOWN_CONTRACT,
    REJECT_NOT_IN_COMPUTE_PHASE,
    REJECT_CANDIDATE_NOT_IN_SET,
    REJECT_SCHNORR_FAILED,
)


@dataclass(frozen=True)
class Outcome:
    """Result of handling one message."""

    accepted: bool
    kind: str
    sender: str
    reason: str
    detail: str = ""


@dataclass(frozen=True)
class FreezeRecord:
    """Audit copy of an accepted freeze: original coin and candidates.

    Candidate pairs are stored sorted by encoding, which erases the
    sender's transmission order on purpose: stored order must not leak
    which candidate commits to which bit.
    """

    coin: int
    candidate_pairs: Tuple[Tuple[int, int], ...]

    @property
    def ell(self) -> int:
        return len(self.candidate_pairs)


@dataclass
class ContractRecord:
    parties: Tuple[str, ...]
    frozen: set
    phase: str
    ell: int


@dataclass(frozen=True)
class Snapshot:
    seq: int
    outcome: Optional[Outcome]
    state: dict = field(hash=False)
    state_hash: str = ""


def bit_proof_context(contract_id: bytes, party_index: int, k: int, slot: int) -> bytes:
    """Domain context binding a bit proof to exactly one posted slot."""
    return (
        contract_id
        + party_index.to_bytes(4, "big")
        + k.to_bytes(4, "big")
        + slot.to_bytes(1, "big")
    )


class Blockchain:
    """Deterministic single-chain simulator with snapshot history."""

    def __init__(self, group: PrimeOrderGroup):
        self.group = group
        self.contracts: Dict[bytes, ContractRecord] = {}
        self.frozen_coins: Dict[Tuple[bytes, str], int] = {}
        self.freeze_records: Dict[Tuple[bytes, str], FreezeRecord] = {}
        self._finalize_audit: Dict[bytes, FinalizeMessage] = {}
        self._snapshots: List[Snapshot] = []
        self._lock = threading.Lock()
        self._seq = 0
        self._emit_snapshot(None)

    # -- state serialization -------------------------------------------

    def serialize_state(self) -> dict:
        """JSON-compatible view of the three protocol tables."""
        enc = self.group.encode_element
        contracts = {}
        for cid, rec in self.contracts.items():
            contracts[cid.hex()] = {
                "parties": list(rec.parties),
                "frozen": sorted(rec.frozen),
                "phase": rec.phase,
                "ell": rec.ell,
            }
        coins = {}
        for (cid, party), coin in self.frozen_coins.items():
            coins.setdefault(cid.hex(), {})[party] = enc(coin).hex()
        records = {}
        for (cid, party), rec in self.freeze_records.items():
            records.setdefault(cid.hex(), {})[party] = {
                "coin": enc(rec.coin).hex(),
                "candidates": [
                    [enc(a).hex(), enc(b).hex()] for a, b in rec.candidate_pairs
                ],
            }
        return {
            "contracts": contracts,
            "frozen_coins": coins,
            "freeze_records": records,
        }

    def state_hash(self) -> str:
        blob = json.dumps(
            self.serialize_state(), sort_keys=True, separators=(",", ":")
        ).encode()
        return hashlib.sha256(blob).hexdigest()

    def snapshot_log(self) -> Tuple[Snapshot, ...]:
        return tuple(self._snapshots)

    def _emit_snapshot(self, outcome: Optional[Outcome]) -> None:
        self._snapshots.append(
            Snapshot(
                seq=self._seq,
                outcome=outcome,
                state=copy.deepcopy(self.serialize_state()),
                state_hash=self.state_hash(),
            )
        )

    # -- message handling ----------------------------------------------

    def handle(self, msg, sender: str) -> Outcome:
        """Apply one on-chain message and snapshot the result."""
        with self._lock:
            if isinstance(msg, FreezeMessage):
                outcome = self._handle_freeze(msg, sender)
            elif isinstance(msg, FinalizeMessage):
                outcome = self._handle_finalize(msg, sender)
            else:
                raise TypeError(f"not an on-chain message: {type(msg).__name__}")
            self._seq += 1
            self._emit_snapshot(outcome)
            return outcome

    def _reject(self, kind: str, sender: str, reason: str, detail: str = "") -> Outcome:
        return Outcome(False, kind, sender, reason, detail)

    def _handle_freeze(self, msg: FreezeMessage, sender: str) -> Outcome:
        reject = lambda reason, detail="": self._reject("freeze", sender, reason, detail)

        if not msg.contract_id:
            return reject(REJECT_MALFORMED, "empty contract id")
        if not msg.parties or len(set(msg.parties)) != len(msg.parties):
            return reject(REJECT_MALFORMED, "party list empty or not distinct")
        if msg.ell < 1:
            return reject(REJECT_MALFORMED, "no bit slots")
        if not self.group.is_member(msg.coin):
            return reject(REJECT_MALFORMED, "coin outside the group")
        for pair in msg.slots:
            if pair[0].commitment == pair[1].commitment:
                return reject(REJECT_MALFORMED, "candidate pair not distinct")

        if sender not in msg.parties:
            return reject(REJECT_SENDER_NOT_IN_PARTIES)

        record = self.contracts.get(msg.contract_id)
        if record is not None:
            if record.phase != PHASE_FREEZE:
                return reject(REJECT_NOT_IN_FREEZE_PHASE, f"phase is {record.phase}")
            if record.parties != msg.parties:
                return reject(REJECT_PARTY_SET_MISMATCH)
            if sender in record.frozen:
                return reject(REJECT_ALREADY_FROZEN)
            if record.ell != msg.ell:
                return reject(
                    REJECT_MALFORMED,
                    f"bit width {msg.ell} does not match contract width {record.ell}",
                )

        party_index = msg.parties.index(sender)
        for k, pair in enumerate(msg.slots):
            for slot_idx, slot in enumerate(pair):
                ctx = bit_proof_context(msg.contract_id, party_index, k, slot_idx)
                if not bnizk_verify(self.group, slot.commitment, slot.proof, ctx):
                    return reject(
                        REJECT_BIT_PROOF_INVALID,
                        f"bit {k} slot {slot_idx} of {sender}",
                    )

        # all checks passed; mutate state atomically from here on
        if record is None:
            record = ContractRecord(
                parties=msg.parties, frozen=set(), phase=PHASE_FREEZE, ell=msg.ell
            )
            self.contracts[msg.contract_id] = record
        record.frozen.add(sender)
        self.frozen_coins[(msg.contract_id, sender)] = msg.coin
        self.freeze_records[(msg.contract_id, sender)] = FreezeRecord(
            coin=msg.coin,
            candidate_pairs=tuple(
                tuple(sorted((pair[0].commitment, pair[1].commitment)))
                for pair in msg.slots
            ),
        )
        if record.frozen == set(record.parties):
            record.phase = PHASE_COMPUTE
        return Outcome(True, "freeze", sender, ACCEPTED)

    def _handle_finalize(self, msg: FinalizeMessage, sender: str) -> Outcome:
        # any sender may deliver a finalize; only validity matters
        reject = lambda reason, detail="": self._reject(
            "finalize", sender, reason, detail
        )

        record = self.contracts.get(msg.contract_id)
        if record is None:
            return reject(REJECT_UNKNOWN_CONTRACT)
        if record.phase != PHASE_COMPUTE:
            return reject(REJECT_NOT_IN_COMPUTE_PHASE, f"phase is {record.phase}")

        n = len(record.parties)
        if len(msg.selected) != n or any(len(row) != record.ell for row in msg.selected):
            return reject(
                REJECT_MALFORMED,
                f"selected matrix must be {n} x {record.ell}",
            )

        for j, party in enumerate(record.parties):
            frec = self.freeze_records[(msg.contract_id, party)]
            for k in range(record.ell):
                if msg.selected[j][k] not in frec.candidate_pairs[k]:
                    return reject(
                        REJECT_CANDIDATE_NOT_IN_SET, f"party {party} bit {k}"
                    )

        new_coins = [
            recompose_bits(self.group, row, record.ell) for row in msg.selected
        ]
        old = self.group.product(
            self.frozen_coins[(msg.contract_id, p)] for p in record.parties
        )
        statement = quotient(self.group, self.group.product(new_coins), old)
        if not schnorr_verify(self.group, statement, msg.proof, msg.contract_id):
            return reject(REJECT_SCHNORR_FAILED)

        for party, coin in zip(record.parties, new_coins):
            self.frozen_coins[(msg.contract_id, party)] = coin
        record.phase = PHASE_FINALIZED
        self._finalize_audit[msg.contract_id] = msg
        return Outcome(True, "finalize", sender, ACCEPTED)

    # -- audit helpers ---------------------------------------------------

    def contract_phase(self, contract_id: bytes) -> Optional[str]:
        rec = self.contracts.get(contract_id)
        return rec.phase if rec else None

    def freeze_records_for(self, contract_id: bytes) -> List[FreezeRecord]:
        """Freeze records in party order; raises if any are missing."""
        rec = self.contracts[contract_id]
        return [self.freeze_records[(contract_id, p)] for p in rec.parties]

    def verify_finalized(self, contract_id: bytes) -> bool:
        """Re-check the accepted balance proof from stored data only.

        Uses the original coins kept in FreezeRecords against the
        current (post-payout) FrozenCoins; an accepted contract must
        always pass, anything else indicates state corruption.
        """
        rec = self.contracts.get(contract_id)
        msg = self._finalize_audit.get(contract_id)
        if rec is None or rec.phase != PHASE_FINALIZED or msg is None:
            return False
        old = self.group.product(
            self.freeze_records[(contract_id, p)].coin for p in rec.parties
        )
        new = self.group.product(
            self.frozen_coins[(contract_id, p)] for p in rec.parties
        )
        statement = quotient(self.group, new, old)
        return schnorr_verify(self.group, statement, msg.proof, contract_id)
