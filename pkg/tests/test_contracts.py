import pytest
from hypothesis import given, strategies as st

from pscsim.contracts import (
    ContractInput,
    check_zero_sum,
    auction_contract,
    bad_contract,
    identity_contract,
    make_contract,
)


def _run(contract, values, aux=None):
    aux = aux or [b""] * len(values)
    return contract([ContractInput(v, a) for v, a in zip(values, aux)])


def test_auction_basic():
    auction = auction_contract(2)
    result = _run(auction, [0, 5, 3])
    assert result.values == (5, 0, 3)
    assert result.out == b"1"


def test_auction_tie_goes_to_earliest():
    auction = auction_contract(2)
    result = _run(auction, [2, 4, 4])
    assert result.values == (6, 0, 4)
    assert result.out == b"1"


def test_auction_later_higher_bid_wins():
    auction = auction_contract(3)
    result = _run(auction, [1, 2, 7, 5])
    assert result.values == (8, 2, 0, 5)
    assert result.out == b"2"


def test_auction_all_zero_bids_fails():
    auction = auction_contract(3)
    assert _run(auction, [5, 0, 0, 0]) is None


def test_auction_preserves_sum():
    auction = auction_contract(4)
    values = [3, 9, 1, 9, 4]
    result = _run(auction, values)
    assert sum(result.values) == sum(values)
    assert check_zero_sum(values, result.values)


@given(st.lists(st.integers(min_value=0, max_value=100), min_size=2, max_size=6))
def test_auction_properties(values):
    auction = auction_contract(len(values) - 1)
    result = _run(auction, values)
    bids = values[1:]
    if max(bids) == 0:
        assert result is None
        return
    winner = int(result.out)
    assert result.values[winner] == 0
    assert result.values[0] == values[0] + max(bids)
    assert bids[winner - 1] == max(bids)
    # earliest maximal bidder wins
    assert all(b < bids[winner - 1] for b in bids[: winner - 1])
    assert check_zero_sum(values, result.values)


def test_identity_contract():
    ident = identity_contract(1)
    result = _run(ident, [7])
    assert result.values == (7,)
    assert result.out == b""


def test_bad_contract_breaks_zero_sum():
    bad = bad_contract(2)
    result = _run(bad, [5, 5])
    assert result.values == (6, 5)
    assert not check_zero_sum([5, 5], result.values)


def test_check_zero_sum():
    assert check_zero_sum([1, 2, 3], [6, 0, 0])
    assert not check_zero_sum([1, 2, 3], [6, 0, 1])
    with pytest.raises(ValueError):
        check_zero_sum([1, 2], [3])


def test_arity_enforced():
    auction = auction_contract(2)
    with pytest.raises(ValueError):
        _run(auction, [1, 2])
    ident = identity_contract(2)
    with pytest.raises(ValueError):
        _run(ident, [1, 2, 3])


def test_aux_length_cap():
    ident = identity_contract(1)
    with pytest.raises(ValueError):
        _run(ident, [1], aux=[b"x" * 5000])


def test_make_contract_registry():
    assert make_contract("auction", 3).arity == 3
    assert make_contract("identity", 2).arity == 2
    assert make_contract("bad", 2).arity == 2
    with pytest.raises(ValueError):
        make_contract("auction", 1)  # needs a seller and a bidder
    with pytest.raises(ValueError):
        make_contract("unknown", 2)


def test_code_digests_distinguish_contracts():
    digests = {
        make_contract("auction", 3).code_digest,
        make_contract("auction", 4).code_digest,
        make_contract("identity", 3).code_digest,
        make_contract("bad", 3).code_digest,
    }
    assert len(digests) == 4
    # stable across constructions
    assert make_contract("auction", 3).code_digest == make_contract("auction", 3).code_digest
