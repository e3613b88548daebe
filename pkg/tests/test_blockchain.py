import dataclasses
import random

import pytest

from pscsim.blockchain import (
    ACCEPTED,
    Blockchain,
    PHASE_COMPUTE,
    PHASE_FINALIZED,
    PHASE_FREEZE,
    REJECT_ALREADY_FROZEN,
    REJECT_BIT_PROOF_INVALID,
    REJECT_CANDIDATE_NOT_IN_SET,
    REJECT_MALFORMED,
    REJECT_NOT_IN_COMPUTE_PHASE,
    REJECT_NOT_IN_FREEZE_PHASE,
    REJECT_PARTY_SET_MISMATCH,
    REJECT_SCHNORR_FAILED,
    REJECT_SENDER_NOT_IN_PARTIES,
    REJECT_UNKNOWN_CONTRACT,
)
from pscsim.contracts import make_contract
from pscsim.group import toy_group
from pscsim.messages import CandidateSlot, FinalizeMessage, FreezeMessage
from pscsim.mpc import eval_fhat
from pscsim.party import Party
from pscsim.sigma import SchnorrProof

TOY = toy_group()
PARTIES = ("P1", "P2")


def make_setup(seed=7, values=(1, 0), contract_name="identity", ell=1):
    """Parties with a shared session plus their freeze messages."""
    contract = make_contract(contract_name, len(values))
    parties = {
        pid: Party(pid, TOY, random.Random(seed * 100 + i))
        for i, pid in enumerate(PARTIES[: len(values)])
    }
    msgs = {}
    cid = None
    for i, (pid, party) in enumerate(parties.items()):
        msgs[pid] = party.handle_freeze_request(
            contract, tuple(parties), ell, values[i]
        )
        cid = party.u_create(contract, tuple(parties), ell)
    return contract, parties, msgs, cid


def finalize_via_evaluator(chain, contract, parties, cid):
    """Produce an honest finalize message through the evaluator."""
    inputs, descriptor, plist = [], None, None
    for party in parties.values():
        descriptor, plist, x = party.u_prepare_compute(cid)
        inputs.append(x)
    records = chain.freeze_records_for(cid)
    y = eval_fhat(
        TOY, contract, descriptor, plist, inputs, records, random.Random(99)
    )
    return FinalizeMessage(
        contract_id=cid, selected=y.selected, out=y.out, proof=y.proof
    )


def test_freeze_lifecycle_and_phases():
    contract, parties, msgs, cid = make_setup()
    chain = Blockchain(TOY)
    assert chain.contract_phase(cid) is None

    outcome = chain.handle(msgs["P1"], "P1")
    assert outcome.accepted and outcome.reason == ACCEPTED
    assert chain.contract_phase(cid) == PHASE_FREEZE

    outcome = chain.handle(msgs["P2"], "P2")
    assert outcome.accepted
    assert chain.contract_phase(cid) == PHASE_COMPUTE
    assert chain.frozen_coins[(cid, "P1")] == msgs["P1"].coin
    rec = chain.freeze_records[(cid, "P1")]
    assert rec.coin == msgs["P1"].coin
    assert rec.ell == 1


def test_candidate_pairs_stored_sorted():
    _, _, msgs, cid = make_setup()
    chain = Blockchain(TOY)
    chain.handle(msgs["P1"], "P1")
    stored = chain.freeze_records[(cid, "P1")].candidate_pairs[0]
    sent = tuple(s.commitment for s in msgs["P1"].slots[0])
    assert set(stored) == set(sent)
    assert stored == tuple(sorted(stored))


def test_sender_not_in_parties():
    _, _, msgs, _ = make_setup()
    chain = Blockchain(TOY)
    outcome = chain.handle(msgs["P1"], "P9")
    assert not outcome.accepted
    assert outcome.reason == REJECT_SENDER_NOT_IN_PARTIES


def test_party_set_mismatch():
    _, parties, msgs, cid = make_setup()
    chain = Blockchain(TOY)
    chain.handle(msgs["P1"], "P1")
    other = dataclasses.replace(msgs["P2"], parties=("P2", "P3"))
    outcome = chain.handle(other, "P2")
    assert outcome.reason == REJECT_PARTY_SET_MISMATCH


def test_already_frozen():
    _, _, msgs, _ = make_setup()
    chain = Blockchain(TOY)
    chain.handle(msgs["P1"], "P1")
    outcome = chain.handle(msgs["P1"], "P1")
    assert outcome.reason == REJECT_ALREADY_FROZEN


def test_not_in_freeze_phase():
    _, _, msgs, _ = make_setup()
    chain = Blockchain(TOY)
    chain.handle(msgs["P1"], "P1")
    chain.handle(msgs["P2"], "P2")  # phase is now compute
    outcome = chain.handle(msgs["P1"], "P1")
    assert outcome.reason == REJECT_NOT_IN_FREEZE_PHASE


def test_bit_proof_invalid():
    _, _, msgs, _ = make_setup()
    chain = Blockchain(TOY)
    msg = msgs["P1"]
    slot = msg.slots[0][0]
    bad = dataclasses.replace(slot.proof, z_a=(slot.proof.z_a + 1) % TOY.q)
    slots = ((CandidateSlot(slot.commitment, bad), msg.slots[0][1]),)
    outcome = chain.handle(dataclasses.replace(msg, slots=slots), "P1")
    assert outcome.reason == REJECT_BIT_PROOF_INVALID
    # the bad first message must not create the contract
    assert chain.contracts == {}


def test_malformed_freezes():
    _, _, msgs, _ = make_setup()
    chain = Blockchain(TOY)
    msg = msgs["P1"]

    outcome = chain.handle(dataclasses.replace(msg, contract_id=b""), "P1")
    assert outcome.reason == REJECT_MALFORMED
    outcome = chain.handle(dataclasses.replace(msg, parties=("P1", "P1")), "P1")
    assert outcome.reason == REJECT_MALFORMED
    outcome = chain.handle(dataclasses.replace(msg, slots=()), "P1")
    assert outcome.reason == REJECT_MALFORMED
    outcome = chain.handle(dataclasses.replace(msg, coin=5), "P1")
    assert outcome.reason == REJECT_MALFORMED
    pair = msg.slots[0]
    same = (pair[0], dataclasses.replace(pair[1], commitment=pair[0].commitment))
    outcome = chain.handle(dataclasses.replace(msg, slots=(same,)), "P1")
    assert outcome.reason == REJECT_MALFORMED


def test_ell_mismatch_rejected():
    contract, parties, msgs, cid = make_setup()
    chain = Blockchain(TOY)
    chain.handle(msgs["P1"], "P1")
    # same session id but two bit slots instead of one
    p2 = Party("P2", TOY, random.Random(5))
    p2.identifiers[cid] = (contract, PARTIES, 2)
    msg2 = p2.u_freeze(cid, 0, 3)
    outcome = chain.handle(msg2, "P2")
    assert outcome.reason == REJECT_MALFORMED
    assert "width" in outcome.detail


def test_unknown_contract_finalize():
    chain = Blockchain(TOY)
    msg = FinalizeMessage(
        contract_id=b"\x01" * 32,
        selected=((2,),),
        out=b"",
        proof=SchnorrProof(nonce_commitment=1, response=0),
    )
    outcome = chain.handle(msg, "P1")
    assert outcome.reason == REJECT_UNKNOWN_CONTRACT


def test_not_in_compute_phase():
    _, _, msgs, cid = make_setup()
    chain = Blockchain(TOY)
    chain.handle(msgs["P1"], "P1")  # still freeze phase
    msg = FinalizeMessage(
        contract_id=cid,
        selected=((1, 1),),
        out=b"",
        proof=SchnorrProof(nonce_commitment=1, response=0),
    )
    outcome = chain.handle(msg, "P1")
    assert outcome.reason == REJECT_NOT_IN_COMPUTE_PHASE


def test_malformed_finalize_dimensions():
    contract, parties, msgs, cid = make_setup()
    chain = Blockchain(TOY)
    chain.handle(msgs["P1"], "P1")
    chain.handle(msgs["P2"], "P2")
    msg = FinalizeMessage(
        contract_id=cid,
        selected=((2,),),  # needs two rows
        out=b"",
        proof=SchnorrProof(nonce_commitment=1, response=0),
    )
    assert chain.handle(msg, "P1").reason == REJECT_MALFORMED


def test_candidate_not_in_set():
    contract, parties, msgs, cid = make_setup()
    chain = Blockchain(TOY)
    chain.handle(msgs["P1"], "P1")
    chain.handle(msgs["P2"], "P2")
    honest = finalize_via_evaluator(chain, contract, parties, cid)
    pair = chain.freeze_records[(cid, "P1")].candidate_pairs[0]
    outsider = next(
        x for x in (1, 2, 3, 4, 6, 8) if TOY.is_member(x) and x not in pair
    )
    selected = ((outsider,), honest.selected[1])
    outcome = chain.handle(
        dataclasses.replace(honest, selected=selected), "P1"
    )
    assert outcome.reason == REJECT_CANDIDATE_NOT_IN_SET


def test_schnorr_failed_and_accept_path():
    contract, parties, msgs, cid = make_setup()
    chain = Blockchain(TOY)
    chain.handle(msgs["P1"], "P1")
    chain.handle(msgs["P2"], "P2")
    honest = finalize_via_evaluator(chain, contract, parties, cid)

    forged = dataclasses.replace(
        honest,
        proof=dataclasses.replace(
            honest.proof, response=(honest.proof.response + 1) % TOY.q
        ),
    )
    outcome = chain.handle(forged, "P1")
    assert outcome.reason == REJECT_SCHNORR_FAILED
    assert chain.contract_phase(cid) == PHASE_COMPUTE

    outcome = chain.handle(honest, "P1")
    assert outcome.accepted
    assert chain.contract_phase(cid) == PHASE_FINALIZED
    assert chain.verify_finalized(cid)
    # payouts replaced the deposits
    new_coins = [chain.frozen_coins[(cid, p)] for p in PARTIES]
    assert new_coins[0] != msgs["P1"].coin or new_coins[1] != msgs["P2"].coin


def test_finalize_sender_unrestricted():
    contract, parties, msgs, cid = make_setup()
    chain = Blockchain(TOY)
    chain.handle(msgs["P1"], "P1")
    chain.handle(msgs["P2"], "P2")
    honest = finalize_via_evaluator(chain, contract, parties, cid)
    # immediate closure: whoever delivers a valid finalize wins
    assert chain.handle(honest, "P99").accepted


def test_rejections_leave_state_hash_unchanged():
    _, _, msgs, _ = make_setup()
    chain = Blockchain(TOY)
    chain.handle(msgs["P1"], "P1")
    before = chain.state_hash()
    chain.handle(msgs["P1"], "P1")  # already-frozen
    assert chain.state_hash() == before
    chain.handle(msgs["P1"], "P9")  # sender-not-in-parties
    assert chain.state_hash() == before


def test_snapshots_grow_and_stay_immutable():
    _, _, msgs, _ = make_setup()
    chain = Blockchain(TOY)
    assert len(chain.snapshot_log()) == 1  # genesis
    chain.handle(msgs["P1"], "P1")
    first = chain.snapshot_log()[1]
    frozen_view = first.state["contracts"]
    chain.handle(msgs["P1"], "P1")  # rejected, still snapshotted
    chain.handle(msgs["P2"], "P2")
    log = chain.snapshot_log()
    assert len(log) == 4
    assert log[1].state["contracts"] == frozen_view
    assert [s.seq for s in log] == [0, 1, 2, 3]
    assert log[2].outcome.reason == REJECT_ALREADY_FROZEN
    assert log[1].state_hash == log[2].state_hash  # rejection changed nothing
    assert log[3].state_hash != log[2].state_hash


def test_state_hash_reflects_state_only():
    _, _, msgs, _ = make_setup()
    a = Blockchain(TOY)
    b = Blockchain(TOY)
    assert a.state_hash() == b.state_hash()
    a.handle(msgs["P1"], "P1")
    b.handle(msgs["P1"], "P9")  # rejected
    b.handle(msgs["P1"], "P1")
    assert a.state_hash() == b.state_hash()


def test_verify_finalized_false_before_close():
    _, _, msgs, cid = make_setup()
    chain = Blockchain(TOY)
    chain.handle(msgs["P1"], "P1")
    assert not chain.verify_finalized(cid)


def test_non_chain_message_raises():
    chain = Blockchain(TOY)
    with pytest.raises(TypeError):
        chain.handle(object(), "P1")
