"""Private smart contract evaluation over committed coins.

Parties freeze Pedersen-committed deposits on a simulated blockchain,
a trusted evaluator computes the contract on the hidden values, and
the chain finalizes payouts after checking a zero-knowledge balance
proof.  See the harness module for end-to-end runs.
"""

from .group import (
    EncodingError,
    GroupError,
    PrimeOrderGroup,
    get_group,
    production_group,
    toy_group,
)
from .pedersen import Opening, commit, combine, quotient, recompose_bits, verify_opening
from .sigma import (
    BitProof,
    ChallengeOracle,
    ProgrammableOracle,
    SchnorrProof,
    bnizk_prove,
    bnizk_verify,
    schnorr_prove,
    schnorr_simulate,
    schnorr_verify,
)
from .contracts import (
    ContractFunction,
    ContractInput,
    ContractResult,
    check_zero_sum,
    make_contract,
)
from .messages import (
    BitCandidates,
    CandidateSlot,
    FinalizeMessage,
    FreezeMessage,
    MpcAbort,
    MpcInput,
    MpcOutput,
    decode_message,
    encode_message,
)
from .blockchain import Blockchain, Outcome
from .party import FhatDescriptor, Party, contract_instance_id
from .mpc import IdealMpc, eval_fhat
from .harness import (
    ADVERSARY_MODES,
    RunConfig,
    RunReport,
    RunResult,
    replay_transcript,
    run_experiment,
    verify_transcript,
)

__version__ = "0.1.0"
