"""Idealized trusted evaluator.

Stands in for a real multiparty computation: parties hand it their
secrets over private channels, it checks them against the public chain
data, runs the contract, and broadcasts the selected output bit
commitments together with a balance proof.

The evaluator is honest but not a policeman.  It refuses inconsistent
inputs (a submitted opening must match the frozen coin and candidate
pairs), yet it happily evaluates a contract that violates conservation
of funds; the resulting balance proof simply fails on-chain, which is
the blockchain's job to notice, not this entity's.
"""

import threading
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .blockchain import FreezeRecord
from .contracts import ContractFunction, ContractInput
from .group import PrimeOrderGroup
from .messages import MpcAbort, MpcInput, MpcOutput
from .party import FhatDescriptor
from .pedersen import commit, quotient, recompose_bits
from .sigma import schnorr_prove

ABORT_INPUT_INCONSISTENT = "input-inconsistent"
ABORT_CONTRACT_FAILURE = "contract-failure"
ABORT_OUTPUT_OUT_OF_RANGE = "output-out-of-range"
ABORT_MISSING_CHAIN_DATA = "missing-chain-data"


def consistency_check(
    group: PrimeOrderGroup,
    x: MpcInput,
    record: FreezeRecord,
    ell: int,
) -> Optional[str]:
    """Compare one party's private input against their public record.

    Returns None when everything matches, else a short description of
    the first mismatch found.
    """
    if not (0 <= x.value < (1 << ell)) or not group.is_scalar(x.randomness):
        return "value or randomness out of range"
    if len(x.bits) != ell or record.ell != ell:
        return "bit candidate count mismatch"
    if commit(group, x.value, x.randomness) != record.coin:
        return "opening does not match frozen coin"
    for k, b in enumerate(x.bits):
        if {b.c0, b.c1} != set(record.candidate_pairs[k]):
            return f"candidate pair mismatch at bit {k}"
        if commit(group, 0, b.s0) != b.c0 or commit(group, 1, b.s1) != b.c1:
            return f"candidate opening invalid at bit {k}"
    return None


def eval_fhat(
    group: PrimeOrderGroup,
    contract: ContractFunction,
    descriptor: FhatDescriptor,
    parties: Sequence[str],
    inputs: Sequence[MpcInput],
    records: Sequence[FreezeRecord],
    rng,
) -> Union[MpcOutput, MpcAbort]:
    """Run the consistency-checked contract evaluation.

    On success returns the selected bit commitments per party, the
    public contract output, and a proof that new coins and old coins
    commit to the same total.
    """
    if contract.code_digest != descriptor.code_digest:
        raise ValueError("resolver returned a different contract")
    ell = descriptor.ell

    for party, x, record in zip(parties, inputs, records):
        problem = consistency_check(group, x, record, ell)
        if problem is not None:
            return MpcAbort(f"{ABORT_INPUT_INCONSISTENT}:{party}:{problem}")

    result = contract([ContractInput(value=x.value, aux=x.aux) for x in inputs])
    if result is None:
        return MpcAbort(ABORT_CONTRACT_FAILURE)
    if any(not 0 <= v < (1 << ell) for v in result.values):
        return MpcAbort(ABORT_OUTPUT_OUT_OF_RANGE)

    selected: List[Tuple[int, ...]] = []
    witness = 0
    for x, new_value in zip(inputs, result.values):
        row = []
        recovered = 0
        for k, b in enumerate(x.bits):
            if (new_value >> k) & 1:
                row.append(b.c1)
                recovered = (recovered + (b.s1 << k)) % group.q
            else:
                row.append(b.c0)
                recovered = (recovered + (b.s0 << k)) % group.q
        selected.append(tuple(row))
        witness = (witness + recovered - x.randomness) % group.q

    new_total = group.product(recompose_bits(group, row, ell) for row in selected)
    old_total = group.product(r.coin for r in records)
    statement = quotient(group, new_total, old_total)
    proof = schnorr_prove(
        group, statement, witness, descriptor.contract_id, rng
    )
    return MpcOutput(selected=tuple(selected), proof=proof, out=result.out)


@dataclass
class SubmissionLog:
    sender: str
    accepted: bool
    note: str = ""


class IdealMpc:
    """Input ledger plus broadcast: evaluates once everyone submitted.

    ``resolver`` maps a descriptor to the contract function and the
    per-party freeze records read from the chain; ``deliver`` pushes a
    result to one party.  Both are injected so the harness controls
    all I/O and the evaluator stays a pure state machine.
    """

    def __init__(
        self,
        resolver: Callable,
        deliver: Callable,
        rng,
    ):
        self.resolver = resolver
        self.deliver = deliver
        self.rng = rng
        self._inputs: Dict[Tuple[FhatDescriptor, tuple], Dict[str, MpcInput]] = {}
        self.log: List[SubmissionLog] = []
        self._lock = threading.Lock()

    def submit(
        self,
        sender: str,
        descriptor: FhatDescriptor,
        parties: Sequence[str],
        x: MpcInput,
    ) -> None:
        """Record one party's input; evaluate and broadcast when complete.

        Resubmission before completion replaces the previous input.
        Submissions from outside the party list are logged and dropped.
        """
        parties = tuple(parties)
        with self._lock:
            if sender not in parties or len(parties) != descriptor.arity:
                self.log.append(
                    SubmissionLog(sender, False, "sender not in party list")
                )
                return
            key = (descriptor, parties)
            ledger = self._inputs.setdefault(key, {})
            ledger[sender] = x
            self.log.append(SubmissionLog(sender, True))
            if set(ledger) != set(parties):
                return
            del self._inputs[key]
            try:
                contract, records, group = self.resolver(descriptor)
                y = eval_fhat(
                    group,
                    contract,
                    descriptor,
                    parties,
                    [ledger[p] for p in parties],
                    records,
                    self.rng,
                )
            except KeyError:
                y = MpcAbort(ABORT_MISSING_CHAIN_DATA)
        for p in parties:
            self.deliver(p, descriptor, parties, y)
