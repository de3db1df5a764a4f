import itertools
import random
from fractions import Fraction

import pytest

from gsrmev.curve import ConstantProduct
from gsrmev.exchange import PoolState, Side, Transaction
from gsrmev.sequencing import Tiebreak, ViolationReason, greedy_order, greedy_order_indices, verify_gsr
from oracles import gsr_reference

F = Fraction
K = F(10000)
CURVE = ConstantProduct(K)
S0 = PoolState(F(100), F(100))

ALPHABET = [
    Transaction.sell_x(F(10), 1),
    Transaction.sell_x(F(3), 2),
    Transaction.sell_y(F(7), 3),
    Transaction.sell_y(F(25), 4),
]


def as_pairs(txs):
    return [("x" if t.side is Side.SELL_X else "y", t.quantity) for t in txs]


def test_empty_is_valid():
    w = verify_gsr(S0, [], CURVE, 0)
    assert w.valid and w.first_violation is None and w.order == ()


def test_back_run_is_valid():
    txs = [Transaction.sell_x(F(10), 1), Transaction.sell_y(F(100, 11))]
    assert verify_gsr(S0, txs, CURVE, F(0)).valid


def test_sandwich_rejected_at_position_2():
    txs = [Transaction.sell_x(F(5)), Transaction.sell_x(F(10), 1), Transaction.sell_y(F(14))]
    w = verify_gsr(S0, txs, CURVE, F(0))
    assert not w.valid
    assert w.first_violation.position == 2
    assert w.first_violation.reason is ViolationReason.WRONG_DIRECTION_X
    assert gsr_reference(S0.x, S0.y, K, 0, as_pairs(txs)) == 2


def test_explicit_order_argument():
    txs = [Transaction.sell_y(F(100, 11)), Transaction.sell_x(F(10), 1)]
    assert verify_gsr(S0, txs, CURVE, F(0), order=[1, 0]).valid
    with pytest.raises(ValueError):
        verify_gsr(S0, txs, CURVE, F(0), order=[0, 0])


@pytest.mark.parametrize("fee", [F(0), F(19, 100)])
def test_exhaustive_alphabet_agreement(fee):
    checked = 0
    for n in range(6):
        for seq in itertools.product(ALPHABET, repeat=n):
            w = verify_gsr(S0, list(seq), CURVE, fee)
            ref = gsr_reference(S0.x, S0.y, K, fee, as_pairs(seq))
            assert (w.first_violation.position if not w.valid else None) == ref, seq
            checked += 1
    assert checked == 1 + 4 + 16 + 64 + 256 + 1024


def random_txs(rng, n, exact=True):
    out = []
    for i in range(n):
        side = rng.choice(list(Side))
        q = F(rng.randint(1, 400), 10) if exact else rng.uniform(0.1, 40)
        out.append(Transaction(side, q, i))
    return out


def test_random_long_sequences_agree():
    rng = random.Random(0)
    for _ in range(2000):
        txs = random_txs(rng, rng.randint(6, 30))
        fee = rng.choice([F(0), F(3, 1000), F(19, 100)])
        w = verify_gsr(S0, txs, CURVE, fee)
        ref = gsr_reference(S0.x, S0.y, K, fee, as_pairs(txs))
        assert (None if w.valid else w.first_violation.position) == ref


@pytest.mark.parametrize("tiebreak", list(Tiebreak))
def test_greedy_order_always_valid(tiebreak):
    rng = random.Random(1)
    for trial in range(2000):
        exact = trial % 2 == 0
        txs = random_txs(rng, rng.randint(0, 50), exact)
        s0 = S0 if exact else PoolState(100.0, 100.0)
        curve = CURVE if exact else ConstantProduct(1e4)
        fee = rng.choice([0, F(19, 100)]) if exact else rng.choice([0.0, 0.003])
        idx = greedy_order_indices(s0, txs, curve, fee, tiebreak)
        assert sorted(idx) == list(range(len(txs)))
        assert verify_gsr(s0, txs, curve, fee, order=idx).valid


def test_greedy_singleton_and_pair():
    assert greedy_order(S0, [Transaction.sell_x(F(10))], CURVE, 0) == [Transaction.sell_x(F(10))]
    pair = [Transaction.sell_x(F(10)), Transaction.sell_y(F(100, 11))]
    assert greedy_order(S0, pair, CURVE, F(0), Tiebreak.INPUT_ORDER) == pair


def test_greedy_one_sided_keeps_tiebreak_order():
    txs = [Transaction.sell_x(F(3)), Transaction.sell_x(F(1)), Transaction.sell_x(F(2))]
    assert greedy_order(S0, txs, CURVE, 0, Tiebreak.INPUT_ORDER) == txs
    asc = greedy_order(S0, txs, CURVE, 0, Tiebreak.BY_QUANTITY_ASC)
    assert [t.quantity for t in asc] == [1, 2, 3]
    assert verify_gsr(S0, asc, CURVE, 0).valid


def test_float_round_trip_not_spuriously_rejected():
    s0 = PoolState(100.0, 100.0)
    curve = ConstantProduct(1e4)
    back = 100.0 - 1e4 / 110.0
    txs = [Transaction.sell_x(10.0, 1), Transaction.sell_y(back), Transaction.sell_x(10.0, 2), Transaction.sell_y(back)]
    assert verify_gsr(s0, txs, curve, 0.0).valid


def test_valid_sequences_keep_prefix_property():
    rng = random.Random(2)
    for _ in range(500):
        txs = random_txs(rng, 12)
        order = greedy_order_indices(S0, txs, CURVE, F(19, 100))
        seq = [txs[i] for i in order]
        from oracles import replay_states

        states = replay_states(S0.x, S0.y, K, F(19, 100), as_pairs(seq))
        for i, tx in enumerate(seq):
            x, y = states[i]
            homogeneous = all(t.side is tx.side for t in seq[i:])
            assert x <= S0.x or y <= S0.y or homogeneous
