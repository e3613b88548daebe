"""Contract functions evaluated inside the trusted computation step.

A contract maps n (value, aux) input pairs to n output values plus an
opaque public output string, or fails.  Conservation of funds is not
the contract author's problem: the evaluator enforces the zero-sum
constraint separately, and the "bad" contract below exists precisely
to exercise what happens when a contract violates it.
"""

import hashlib
import json
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .group import length_prefixed

MAX_AUX_BYTES = 4096
CONTRACT_SCHEME_VERSION = 1


@dataclass(frozen=True)
class ContractInput:
    value: int
    aux: bytes = b""


@dataclass(frozen=True)
class ContractResult:
    values: tuple
    out: bytes


@dataclass(frozen=True)
class ContractFunction:
    """Named contract with a fixed arity and deterministic evaluator.

    ``code_digest`` commits to the contract identity; parties hash it
    into the session identifier so everyone provably runs the same
    program with the same parameters.
    """

    name: str
    arity: int
    params: tuple
    evaluate: Callable[[Sequence[ContractInput]], Optional[ContractResult]] = field(
        compare=False
    )
    code_digest: bytes = b""

    def __call__(self, inputs: Sequence[ContractInput]) -> Optional[ContractResult]:
        if len(inputs) != self.arity:
            raise ValueError(f"{self.name} expects {self.arity} inputs")
        for x in inputs:
            if len(x.aux) > MAX_AUX_BYTES:
                raise ValueError("aux data too long")
        return self.evaluate(inputs)


def _digest(name: str, params: tuple) -> bytes:
    blob = json.dumps(
        {"name": name, "params": list(params), "v": CONTRACT_SCHEME_VERSION},
        sort_keys=True,
        separators=(",", ":"),
    ).encode()
    return hashlib.sha256(length_prefixed(b"psc-contract") + blob).digest()


def check_zero_sum(inputs: Sequence[int], outputs: Sequence[int]) -> bool:
    """Integer conservation check used to vet contract results."""
    if len(inputs) != len(outputs):
        raise ValueError("input/output length mismatch")
    return sum(inputs) == sum(outputs)


def identity_contract(n: int) -> ContractFunction:
    """Every party gets their own deposit back.  Trivially zero-sum."""

    def evaluate(inputs):
        return ContractResult(values=tuple(x.value for x in inputs), out=b"")

    return ContractFunction(
        name="identity", arity=n, params=(n,), evaluate=evaluate,
        code_digest=_digest("identity", (n,)),
    )


def auction_contract(k: int) -> ContractFunction:
    """First-price sealed-bid auction with one seller and k bidders.

    Input 0 is the seller's deposit, inputs 1..k are bids.  The
    highest bid moves to the seller, the winner pays theirs, losers
    are refunded.  Ties go to the earliest bidder.  A winning bid of
    zero is rejected as a failure: zero is the sentinel for "paid",
    so an all-zero auction has no meaningful winner.
    """
    if k < 1:
        raise ValueError("auction needs at least one bidder")

    def evaluate(inputs):
        seller = inputs[0].value
        bids = [x.value for x in inputs[1:]]
        winner = 0
        best = 0
        for i, bid in enumerate(bids, start=1):
            if bid > best:
                best = bid
                winner = i
        if winner == 0:
            return None
        values = [seller + best] + list(bids)
        values[winner] = 0
        return ContractResult(values=tuple(values), out=str(winner).encode())

    return ContractFunction(
        name="auction", arity=k + 1, params=(k,), evaluate=evaluate,
        code_digest=_digest("auction", (k,)),
    )


def bad_contract(n: int) -> ContractFunction:
    """Deliberately non-conserving: inflates party 0's payout by one.

    Used by adversarial runs to show the blockchain catches a cheating
    evaluator via the balance proof, not by re-running the contract.
    """

    def evaluate(inputs):
        values = [x.value for x in inputs]
        values[0] += 1
        return ContractResult(values=tuple(values), out=b"inflated")

    return ContractFunction(
        name="bad", arity=n, params=(n,), evaluate=evaluate,
        code_digest=_digest("bad", (n,)),
    )


CONTRACT_NAMES = ("auction", "identity", "bad")


def make_contract(name: str, n_parties: int) -> ContractFunction:
    """Build a registered contract sized for ``n_parties`` inputs."""
    if name == "auction":
        if n_parties < 2:
            raise ValueError("auction needs a seller and at least one bidder")
        return auction_contract(n_parties - 1)
    if name == "identity":
        return identity_contract(n_parties)
    if name == "bad":
        return bad_contract(n_parties)
    raise ValueError(f"unknown contract {name!r}")
