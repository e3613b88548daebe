"""End-to-end simulation harness.

Drives a full protocol run from one seeded configuration: parties
freeze committed deposits, the trusted evaluator computes the contract
and proves conservation, the chain verifies and finalizes payouts.
Everything is deterministic in the seed, including the adversarial
variants, so a run can be exported as a JSONL transcript and replayed
or audited byte for byte.

Adversary modes and the rejection each must provoke:

 * corrupt-bit-proof: one freeze carries a tampered bit proof
   -> bit-proof-invalid, contract stuck in the freeze phase
 * swap-candidate: a finalize selects the other on-chain candidate
   for one bit -> schnorr-failed, contract stays in compute
 * bad-contract: the evaluator runs a non-conserving contract and an
   adversary submits its output -> schnorr-failed, stays in compute
 * duplicate-freeze: a party replays their own accepted freeze
   -> already-frozen, run still completes honestly
 * early-finalize: a finalize arrives during the freeze phase
   -> not-in-compute-phase, run still completes honestly

In every mode the chain state hash must be identical before and after
the rejected message.
"""

import dataclasses
import hashlib
import json
import random
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .blockchain import (
    Blockchain,
    Outcome,
    PHASE_COMPUTE,
    PHASE_FINALIZED,
    PHASE_FREEZE,
    REJECT_ALREADY_FROZEN,
    REJECT_BIT_PROOF_INVALID,
    REJECT_NOT_IN_COMPUTE_PHASE,
    REJECT_SCHNORR_FAILED,
    bit_proof_context,
)
from .contracts import CONTRACT_NAMES, make_contract
from .group import GROUP_NAMES, PrimeOrderGroup, get_group
from .messages import (
    CandidateSlot,
    FinalizeMessage,
    FreezeMessage,
    MpcAbort,
    MpcOutput,
    decode_message,
    encode_message,
    message_to_json,
)
from .mpc import IdealMpc
from .party import Party, contract_instance_id
from .pedersen import quotient, recompose_bits, validate_bit_width
from .sigma import SchnorrProof, bnizk_verify, schnorr_verify

TRANSCRIPT_VERSION = 1

ADVERSARY_MODES = (
    "none",
    "corrupt-bit-proof",
    "swap-candidate",
    "bad-contract",
    "duplicate-freeze",
    "early-finalize",
)

EXPECTED_REJECTION = {
    "corrupt-bit-proof": ("freeze", REJECT_BIT_PROOF_INVALID),
    "swap-candidate": ("finalize", REJECT_SCHNORR_FAILED),
    "bad-contract": ("finalize", REJECT_SCHNORR_FAILED),
    "duplicate-freeze": ("freeze", REJECT_ALREADY_FROZEN),
    "early-finalize": ("finalize", REJECT_NOT_IN_COMPUTE_PHASE),
}

EXPECTED_FINAL_PHASE = {
    "none": PHASE_FINALIZED,
    "corrupt-bit-proof": PHASE_FREEZE,
    "swap-candidate": PHASE_COMPUTE,
    "bad-contract": PHASE_COMPUTE,
    "duplicate-freeze": PHASE_FINALIZED,
    "early-finalize": PHASE_FINALIZED,
}


@dataclass(frozen=True)
class RunConfig:
    """Everything a run depends on; two equal configs replay identically."""

    values: Tuple[int, ...]
    contract: str = "auction"
    ell: int = 16
    group_name: str = "production"
    seed: int = 0
    adversary: str = "none"
    aux: Tuple[bytes, ...] = ()
    finalizer: str = "first"  # "first" or "all"
    transcript_path: Optional[str] = None

    def validate(self, group: PrimeOrderGroup) -> None:
        n = len(self.values)
        if n < 1:
            raise ValueError("need at least one party value")
        validate_bit_width(group, self.ell, n)
        for v in self.values:
            if not 0 <= v < (1 << self.ell):
                raise ValueError(f"value {v} outside [0, 2^{self.ell})")
        if self.contract not in CONTRACT_NAMES:
            raise ValueError(f"unknown contract {self.contract!r}")
        if self.adversary not in ADVERSARY_MODES:
            raise ValueError(f"unknown adversary mode {self.adversary!r}")
        if self.adversary == "bad-contract" and self.contract != "bad":
            raise ValueError('bad-contract mode requires contract "bad"')
        if self.contract == "bad" and self.values[0] >= (1 << self.ell) - 1:
            raise ValueError(
                "bad contract inflates the first value; it needs headroom"
            )
        if self.adversary != "none" and self.adversary != "bad-contract":
            if self.contract == "bad":
                raise ValueError('contract "bad" is only for bad-contract mode')
        if self.adversary != "none" and n < 2:
            raise ValueError("adversary modes need at least two parties")
        if self.aux and len(self.aux) != n:
            raise ValueError("aux list must match values list")
        if self.finalizer not in ("first", "all"):
            raise ValueError('finalizer must be "first" or "all"')

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["values"] = list(self.values)
        d["aux"] = [a.hex() for a in self.aux]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        d = dict(d)
        d["values"] = tuple(int(v) for v in d.get("values", ()))
        d["aux"] = tuple(bytes.fromhex(a) for a in d.get("aux", ()))
        return cls(**d)


@dataclass
class MessageEvent:
    """One on-chain message as sent, with its canonical bytes and outcome."""

    seq: int
    sender: str
    message: object
    payload: bytes
    outcome: Outcome


@dataclass
class RunReport:
    """Condensed result of one run; ``ok`` is the mode-specific verdict."""

    config: RunConfig
    contract_id: str
    final_phase: Optional[str]
    outcomes: List[Tuple[str, str, str]]  # (kind, sender, reason)
    recovered: Dict[str, Optional[int]]
    out: Optional[bytes]
    zero_sum_ok: Optional[bool]
    conservation_ok: Optional[bool]
    expected_rejection_seen: Optional[bool]
    rejection_state_intact: Optional[bool]
    mpc_aborted: bool
    duration_s: float
    ok: bool


@dataclass
class RunResult:
    report: RunReport
    chain: Blockchain
    parties: Dict[str, Party]
    events: List[MessageEvent]
    group: PrimeOrderGroup
    contract_id: bytes
    contract: object
    mpc_output: object = None


def derive_rng(seed: int, label: str) -> random.Random:
    """Independent deterministic stream per (seed, role)."""
    material = hashlib.sha256(
        len(label).to_bytes(4, "big") + label.encode() + seed.to_bytes(16, "big", signed=True)
    ).digest()
    return random.Random(int.from_bytes(material, "big"))


def _corrupt_bit_proof(group, msg: FreezeMessage, rng) -> Tuple[FreezeMessage, str]:
    """Nudge one response scalar in a randomly chosen bit proof."""
    k = rng.randrange(len(msg.slots))
    slot_idx = rng.getrandbits(1)
    pair = list(msg.slots[k])
    slot = pair[slot_idx]
    bad_proof = dataclasses.replace(
        slot.proof, z_a=(slot.proof.z_a + 1) % group.q
    )
    pair[slot_idx] = CandidateSlot(commitment=slot.commitment, proof=bad_proof)
    slots = list(msg.slots)
    slots[k] = tuple(pair)
    where = f"bit {k} slot {slot_idx}"
    return dataclasses.replace(msg, slots=tuple(slots)), where


def _swap_candidate(
    chain: Blockchain, contract_id: bytes, parties, y: MpcOutput, rng
) -> FinalizeMessage:
    """Replace one selected commitment with its on-chain sibling."""
    j = rng.randrange(len(parties))
    k = rng.randrange(len(y.selected[j]))
    record = chain.freeze_records[(contract_id, parties[j])]
    pair = record.candidate_pairs[k]
    current = y.selected[j][k]
    other = pair[0] if pair[1] == current else pair[1]
    selected = [list(row) for row in y.selected]
    selected[j][k] = other
    return FinalizeMessage(
        contract_id=contract_id,
        selected=tuple(tuple(row) for row in selected),
        out=y.out,
        proof=y.proof,
    )


def run_experiment(cfg: RunConfig) -> RunResult:
    """Execute one full run and judge it against its adversary mode."""
    t0 = time.perf_counter()
    group = get_group(cfg.group_name)
    cfg.validate(group)

    n = len(cfg.values)
    party_ids = tuple(f"P{i + 1}" for i in range(n))
    aux = cfg.aux if cfg.aux else tuple(b"" for _ in party_ids)
    contract = make_contract(cfg.contract, n)
    contract_id = contract_instance_id(contract.code_digest, cfg.ell, party_ids)

    parties = {
        pid: Party(pid, group, derive_rng(cfg.seed, f"party:{pid}"))
        for pid in party_ids
    }
    adv_rng = derive_rng(cfg.seed, "adversary")
    chain = Blockchain(group)
    events: List[MessageEvent] = []

    def send(msg, sender: str) -> Outcome:
        payload = encode_message(group, msg)
        outcome = chain.handle(msg, sender)
        events.append(
            MessageEvent(
                seq=len(events) + 1,
                sender=sender,
                message=msg,
                payload=payload,
                outcome=outcome,
            )
        )
        return outcome

    # --- freeze round ---------------------------------------------------
    corrupt_target = (
        adv_rng.randrange(n) if cfg.adversary == "corrupt-bit-proof" else None
    )
    for i, pid in enumerate(party_ids):
        msg = parties[pid].handle_freeze_request(
            contract, party_ids, cfg.ell, cfg.values[i], aux[i]
        )
        if i == corrupt_target:
            msg, _ = _corrupt_bit_proof(group, msg, adv_rng)
        send(msg, pid)
        if i == 0 and cfg.adversary == "duplicate-freeze":
            send(msg, pid)  # byte-identical replay
        if i == 0 and cfg.adversary == "early-finalize":
            premature = FinalizeMessage(
                contract_id=contract_id,
                selected=tuple(
                    tuple(group.identity for _ in range(cfg.ell))
                    for _ in party_ids
                ),
                out=b"",
                proof=SchnorrProof(nonce_commitment=group.identity, response=0),
            )
            send(premature, pid)

    # --- compute round ----------------------------------------------------
    mpc_output = None
    deliveries: Dict[str, tuple] = {}
    if chain.contract_phase(contract_id) == PHASE_COMPUTE:

        def resolver(descriptor):
            records = chain.freeze_records_for(descriptor.contract_id)
            return contract, records, group

        def deliver(pid, descriptor, pl, y):
            deliveries[pid] = (descriptor, pl, y)

        mpc = IdealMpc(resolver, deliver, derive_rng(cfg.seed, "mpc"))
        for pid in party_ids:
            descriptor, pl, x = parties[pid].handle_compute_request(contract_id)
            mpc.submit(pid, descriptor, pl, x)
        if deliveries:
            mpc_output = deliveries[party_ids[0]][2]

    mpc_aborted = isinstance(mpc_output, MpcAbort)

    # --- finalize round ---------------------------------------------------
    recovered: Dict[str, Optional[int]] = {pid: None for pid in party_ids}
    out_value: Optional[bytes] = None
    if isinstance(mpc_output, MpcOutput):
        if cfg.adversary == "swap-candidate":
            forged = _swap_candidate(
                chain, contract_id, party_ids, mpc_output, adv_rng
            )
            send(forged, party_ids[0])
        elif cfg.adversary == "bad-contract":
            # parties refuse this output locally, the adversary does not
            forged = FinalizeMessage(
                contract_id=contract_id,
                selected=mpc_output.selected,
                out=mpc_output.out,
                proof=mpc_output.proof,
            )
            send(forged, party_ids[0])
        else:
            finalize_msgs = []
            for pid in party_ids:
                descriptor, pl, y = deliveries[pid]
                fmsg = parties[pid].handle_mpc_output(descriptor, pl, y, chain)
                if fmsg is not None:
                    finalize_msgs.append((pid, fmsg))
                    recovered[pid] = parties[pid].coins[-1].value
            senders = finalize_msgs[:1] if cfg.finalizer == "first" else finalize_msgs
            for pid, fmsg in senders:
                send(fmsg, pid)
            if finalize_msgs:
                out_value = finalize_msgs[0][1].out

    # --- judgement --------------------------------------------------------
    final_phase = chain.contract_phase(contract_id)
    outcomes = [(e.outcome.kind, e.sender, e.outcome.reason) for e in events]

    expected_rejection_seen: Optional[bool] = None
    rejection_state_intact: Optional[bool] = None
    if cfg.adversary != "none":
        want_kind, want_reason = EXPECTED_REJECTION[cfg.adversary]
        expected_rejection_seen = False
        snapshots = chain.snapshot_log()
        for e in events:
            if (
                not e.outcome.accepted
                and e.outcome.kind == want_kind
                and e.outcome.reason == want_reason
            ):
                expected_rejection_seen = True
                before = snapshots[e.seq - 1].state_hash
                after = snapshots[e.seq].state_hash
                rejection_state_intact = before == after
                break

    zero_sum_ok: Optional[bool] = None
    conservation_ok: Optional[bool] = None
    if final_phase == PHASE_FINALIZED:
        got = [recovered[pid] for pid in party_ids]
        zero_sum_ok = None not in got and sum(got) == sum(cfg.values)
        conservation_ok = chain.verify_finalized(contract_id)

    honest_done = (
        final_phase == PHASE_FINALIZED
        and zero_sum_ok is True
        and conservation_ok is True
    )
    if cfg.adversary == "none":
        ok = honest_done
    elif cfg.adversary in ("duplicate-freeze", "early-finalize"):
        ok = bool(
            honest_done and expected_rejection_seen and rejection_state_intact
        )
    else:
        ok = bool(
            expected_rejection_seen
            and rejection_state_intact
            and final_phase == EXPECTED_FINAL_PHASE[cfg.adversary]
        )

    report = RunReport(
        config=cfg,
        contract_id=contract_id.hex(),
        final_phase=final_phase,
        outcomes=outcomes,
        recovered=recovered,
        out=out_value,
        zero_sum_ok=zero_sum_ok,
        conservation_ok=conservation_ok,
        expected_rejection_seen=expected_rejection_seen,
        rejection_state_intact=rejection_state_intact,
        mpc_aborted=mpc_aborted,
        duration_s=time.perf_counter() - t0,
        ok=ok,
    )
    result = RunResult(
        report=report,
        chain=chain,
        parties=parties,
        events=events,
        group=group,
        contract_id=contract_id,
        contract=contract,
        mpc_output=mpc_output,
    )
    if cfg.transcript_path:
        export_transcript(result, cfg.transcript_path)
    return result


# -- transcripts ---------------------------------------------------------


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def transcript_lines(result: RunResult) -> List[str]:
    """Render a run as JSONL: header, then message/snapshot pairs.

    The header pins the group, contract, and initial state hash; each
    message line carries the canonical payload bytes (hex) plus a
    readable mirror, and is followed by a snapshot of the post-message
    state.  Identical configs yield identical bytes.
    """
    group = result.group
    cfg = result.report.config
    snapshots = result.chain.snapshot_log()
    header = {
        "type": "header",
        "version": TRANSCRIPT_VERSION,
        "group": {
            "name": group.name,
            "p": hex(group.p),
            "q": hex(group.q),
            "g": hex(group.g),
            "h": hex(group.h),
            "encoding_len": group.encoding_len,
            "scalar_len": group.scalar_len,
            "insecure_test_group": group.insecure_test_group,
        },
        "contract": {
            "name": cfg.contract,
            "parties": list(result.parties),
            "ell": cfg.ell,
            "instance_id": result.contract_id.hex(),
        },
        "seed": cfg.seed,
        "adversary": cfg.adversary,
        "initial_state_hash": snapshots[0].state_hash,
    }
    lines = [_dumps(header)]
    for event in result.events:
        lines.append(
            _dumps(
                {
                    "type": "message",
                    "seq": event.seq,
                    "sender": event.sender,
                    "payload": event.payload.hex(),
                    "body": message_to_json(group, event.message),
                }
            )
        )
        snap = snapshots[event.seq]
        lines.append(
            _dumps(
                {
                    "type": "snapshot",
                    "seq": snap.seq,
                    "outcome": dataclasses.asdict(snap.outcome),
                    "state": snap.state,
                    "state_hash": snap.state_hash,
                }
            )
        )
    return lines


def export_transcript(result: RunResult, path: str) -> None:
    with open(path, "w") as fh:
        for line in transcript_lines(result):
            fh.write(line + "\n")


class TranscriptError(ValueError):
    """Structural transcript problem: bad JSON, bad framing, bad header."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _group_from_header(header: dict) -> PrimeOrderGroup:
    g = header["group"]
    return PrimeOrderGroup(
        name=g["name"],
        p=int(g["p"], 16),
        q=int(g["q"], 16),
        g=int(g["g"], 16),
        h=int(g["h"], 16),
        encoding_len=g["encoding_len"],
        scalar_len=g["scalar_len"],
        insecure_test_group=g["insecure_test_group"],
    )


def _read_transcript(path: str):
    """Yield (line_no, parsed object); raise TranscriptError on bad JSON."""
    with open(path) as fh:
        raw = fh.read()
    entries = []
    for i, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            raise TranscriptError(i, "blank line")
        try:
            entries.append((i, json.loads(line)))
        except json.JSONDecodeError as exc:
            raise TranscriptError(i, f"not valid JSON ({exc.msg})") from None
    if raw and not raw.endswith("\n"):
        raise TranscriptError(len(entries), "truncated final line")
    if not entries:
        raise TranscriptError(0, "empty transcript")
    if entries[0][1].get("type") != "header":
        raise TranscriptError(1, "first line is not a header")
    if entries[0][1].get("version") != TRANSCRIPT_VERSION:
        raise TranscriptError(1, "unsupported transcript version")
    return entries


@dataclass
class ReplayReport:
    """Outcome of re-executing a transcript against a fresh chain."""

    messages: int
    final_state_hash: str
    recorded_state_hash: str
    match: bool
    divergences: List[str] = field(default_factory=list)


def replay_transcript(path: str) -> ReplayReport:
    """Re-apply every message to a fresh chain and compare state hashes.

    Each recorded snapshot must match the recomputed state exactly;
    any divergence is listed with its line number.
    """
    entries = _read_transcript(path)
    header = entries[0][1]
    group = _group_from_header(header)
    chain = Blockchain(group)
    divergences: List[str] = []
    if chain.state_hash() != header["initial_state_hash"]:
        divergences.append("header: initial state hash differs")

    messages = 0
    recorded = header["initial_state_hash"]
    for line_no, obj in entries[1:]:
        if obj.get("type") == "message":
            try:
                msg = decode_message(group, bytes.fromhex(obj["payload"]))
            except (ValueError, KeyError) as exc:
                raise TranscriptError(line_no, f"bad payload: {exc}") from None
            chain.handle(msg, obj["sender"])
            messages += 1
        elif obj.get("type") == "snapshot":
            recorded = obj["state_hash"]
            computed = chain.state_hash()
            if computed != recorded:
                divergences.append(
                    f"line {line_no}: snapshot hash {recorded[:16]}... "
                    f"but replay gives {computed[:16]}..."
                )
        else:
            raise TranscriptError(line_no, f"unknown line type {obj.get('type')!r}")

    final = chain.state_hash()
    return ReplayReport(
        messages=messages,
        final_state_hash=final,
        recorded_state_hash=recorded,
        match=not divergences and final == recorded,
        divergences=divergences,
    )


@dataclass
class ProofCheck:
    line_no: int
    label: str
    ok: Optional[bool]  # None when the check could not be computed
    note: str = ""


@dataclass
class VerifyReport:
    """Offline audit: every proof re-checked without any secrets."""

    checks: List[ProofCheck]
    mismatches: List[str]

    @property
    def consistent(self) -> bool:
        return not self.mismatches


def verify_transcript(path: str) -> VerifyReport:
    """Re-verify all bit proofs and balance proofs in a transcript.

    Each accepted message must carry only passing proofs; a message the
    chain rejected for a proof failure must indeed contain a failing
    proof.  Any disagreement between recorded outcomes and recomputed
    cryptography is reported as a mismatch.
    """
    entries = _read_transcript(path)
    header = entries[0][1]
    group = _group_from_header(header)

    checks: List[ProofCheck] = []
    mismatches: List[str] = []
    # latest accepted chain data, rebuilt as we walk the file
    coins: Dict[Tuple[str, str], int] = {}
    candidates: Dict[Tuple[str, str], tuple] = {}
    party_lists: Dict[str, tuple] = {}

    pending = None  # (line_no, msg, sender, proof checks all passed)
    for line_no, obj in entries[1:]:
        if obj.get("type") == "message":
            try:
                msg = decode_message(group, bytes.fromhex(obj["payload"]))
            except (ValueError, KeyError) as exc:
                raise TranscriptError(line_no, f"bad payload: {exc}") from None
            pending = (line_no, msg, obj["sender"])
            continue
        if obj.get("type") != "snapshot":
            raise TranscriptError(line_no, f"unknown line type {obj.get('type')!r}")
        if pending is None:
            raise TranscriptError(line_no, "snapshot without a preceding message")
        msg_line, msg, sender = pending
        pending = None
        outcome = obj.get("outcome", {})
        accepted = bool(outcome.get("accepted"))
        reason = outcome.get("reason", "")

        if isinstance(msg, FreezeMessage):
            all_ok = _verify_freeze_proofs(group, msg, sender, msg_line, checks)
            if accepted:
                cid = msg.contract_id.hex()
                party_lists.setdefault(cid, msg.parties)
                coins[(cid, sender)] = msg.coin
                candidates[(cid, sender)] = tuple(
                    tuple(sorted((a.commitment, b.commitment))) for a, b in msg.slots
                )
                if not all_ok:
                    mismatches.append(
                        f"line {msg_line}: accepted freeze with a failing bit proof"
                    )
            elif reason == REJECT_BIT_PROOF_INVALID and all_ok:
                mismatches.append(
                    f"line {msg_line}: freeze rejected for its proofs, "
                    "but all proofs verify"
                )
        elif isinstance(msg, FinalizeMessage):
            ok = _verify_balance_proof(
                group, msg, party_lists, coins, candidates, msg_line, checks
            )
            if accepted and ok is not True:
                mismatches.append(
                    f"line {msg_line}: accepted finalize without a valid balance proof"
                )
            elif reason == REJECT_SCHNORR_FAILED and ok is True:
                mismatches.append(
                    f"line {msg_line}: finalize rejected for its proof, "
                    "but the proof verifies"
                )
    return VerifyReport(checks=checks, mismatches=mismatches)


def _verify_freeze_proofs(group, msg: FreezeMessage, sender, line_no, checks) -> bool:
    if sender not in msg.parties:
        checks.append(
            ProofCheck(line_no, "freeze", None, "sender not in party list")
        )
        return False
    party_index = msg.parties.index(sender)
    all_ok = True
    for k, pair in enumerate(msg.slots):
        for slot_idx, slot in enumerate(pair):
            ctx = bit_proof_context(msg.contract_id, party_index, k, slot_idx)
            ok = bnizk_verify(group, slot.commitment, slot.proof, ctx)
            all_ok &= ok
            checks.append(
                ProofCheck(line_no, f"bit[{sender},k={k},slot={slot_idx}]", ok)
            )
    return all_ok


def _verify_balance_proof(
    group, msg: FinalizeMessage, party_lists, coins, candidates, line_no, checks
):
    cid = msg.contract_id.hex()
    parties = party_lists.get(cid)
    if parties is None or any((cid, p) not in coins for p in parties):
        checks.append(
            ProofCheck(line_no, "balance", None, "freeze data incomplete")
        )
        return None
    ell = len(candidates[(cid, parties[0])])
    if len(msg.selected) != len(parties) or any(
        len(row) != ell for row in msg.selected
    ):
        checks.append(
            ProofCheck(line_no, "balance", None, "selected matrix malformed")
        )
        return None
    new_coins = [recompose_bits(group, row, ell) for row in msg.selected]
    old = group.product(coins[(cid, p)] for p in parties)
    statement = quotient(group, group.product(new_coins), old)
    ok = schnorr_verify(group, statement, msg.proof, msg.contract_id)
    checks.append(ProofCheck(line_no, "balance", ok))
    return ok
