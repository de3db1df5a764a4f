from fractions import Fraction

import pytest

from gsrmev.arbitrage import arbitragable_profit, upper_bound
from gsrmev.curve import ConstantProduct, DomainError
from gsrmev.exchange import MarketContext, PoolState, Side, Transaction, execute_sequence, standalone_receipt, user_receipts
from gsrmev.scenario import random_scenario
from gsrmev.sequencing import verify_gsr
from gsrmev.strategy import (
    SearchConfig,
    SearchSizeError,
    achieves_upper_bound,
    brute_force_optimal,
    optimal_f0,
    optimize,
)

F = Fraction
CURVE = ConstantProduct(F(10000))
S0 = PoolState(F(100), F(100))
M0 = MarketContext(F(1), F(1), F(0))
M19 = MarketContext(F(1), F(1), F(19, 100))


def test_f0_empty():
    s = optimal_f0(S0, [], CURVE, M0)
    assert s.sequence == () and s.declared_profit == 0 and s.chosen_subset == frozenset()


def test_f0_single_back_run():
    s = optimal_f0(S0, [Transaction.sell_x(F(10), 1)], CURVE, M0)
    assert s.sequence == (Transaction.sell_x(F(10), 1), Transaction.sell_y(F(100, 11)))
    assert s.declared_profit == F(10, 11) == upper_bound(S0, [Transaction.sell_x(F(10))], CURVE, M0)


def test_f0_order_independent():
    a, b = Transaction.sell_x(F(10), 1), Transaction.sell_y(F(5), 2)
    expected = arbitragable_profit(S0, a, CURVE, M0) + arbitragable_profit(S0, b, CURVE, M0)
    for order in ([a, b], [b, a]):
        s = optimal_f0(S0, order, CURVE, M0)
        assert s.declared_profit == expected
        # brute-force both orders through execute_sequence as an oracle
        assert brute_force_optimal(S0, order, CURVE, M0).declared_profit == expected


def test_f0_rejects_fee():
    with pytest.raises(DomainError, match="brute_force_optimal"):
        optimal_f0(S0, [], CURVE, M19)


def test_f0_returns_to_start_after_each_pair():
    sc = random_scenario(5, n=12)
    s = optimal_f0(sc.initial_state, sc.transactions, sc.curve, sc.market)
    trace = execute_sequence(sc.initial_state, s.sequence, sc.curve, sc.market)
    for step in trace.steps[1::2]:
        assert step.post == sc.initial_state


def test_f0_users_match_standalone_receipts():
    sc = random_scenario(6, n=10)
    s = optimal_f0(sc.initial_state, sc.transactions, sc.curve, sc.market)
    trace = execute_sequence(sc.initial_state, s.sequence, sc.curve, sc.market)
    receipts = user_receipts(trace)
    for tx in sc.transactions:
        alone = standalone_receipt(sc.initial_state, tx, sc.curve, sc.market.fee)
        assert (tx.quantity, alone) in receipts[tx.user]


def test_brute_force_no_users_with_fee():
    s = brute_force_optimal(S0, [], CURVE, M19)
    assert s.declared_profit == 0 and s.sequence == ()


@pytest.mark.parametrize("seed", range(30))
def test_brute_force_matches_f0(seed):
    sc = random_scenario(seed, max_n=6)
    a = optimal_f0(sc.initial_state, sc.transactions, sc.curve, sc.market)
    b = brute_force_optimal(sc.initial_state, sc.transactions, sc.curve, sc.market)
    assert b.declared_profit == a.declared_profit


@pytest.mark.parametrize("fee", [F(0), F(3, 1000), F(19, 100)])
@pytest.mark.parametrize("seed", range(8))
def test_pruning_does_not_change_optimum(fee, seed):
    sc = random_scenario(100 + seed, max_n=4, fee=fee)
    args = (sc.initial_state, sc.transactions, sc.curve, sc.market)
    pruned = brute_force_optimal(*args)
    full = brute_force_optimal(*args, SearchConfig(prune=False))
    assert pruned.declared_profit == pytest.approx(full.declared_profit, rel=1e-12, abs=1e-12)
    assert full.declared_profit <= upper_bound(*args) + 1e-9


def test_strategy_invariants():
    sc = random_scenario(7, max_n=5, fee=F(19, 100))
    s = brute_force_optimal(sc.initial_state, sc.transactions, sc.curve, sc.market)
    users_in_seq = [tx for tx in s.sequence if not tx.is_miner]
    assert sorted(tx.user for tx in users_in_seq) == sorted(sc.transactions[i].user for i in s.chosen_subset)
    assert verify_gsr(sc.initial_state, s.sequence, sc.curve, sc.market.fee).valid
    replay = execute_sequence(sc.initial_state, s.sequence, sc.curve, sc.market)
    assert replay.final_profit == s.declared_profit


def test_size_limit():
    txs = [Transaction.sell_x(F(1), i) for i in range(9)]
    with pytest.raises(SearchSizeError):
        brute_force_optimal(S0, txs, CURVE, M19)


def test_extra_grid_is_accepted():
    sc = random_scenario(8, n=3, fee=F(19, 100))
    base = brute_force_optimal(sc.initial_state, sc.transactions, sc.curve, sc.market)
    grid = tuple(sc.initial_state.x * F(i, 10) for i in (8, 9, 11, 12))
    refined = brute_force_optimal(sc.initial_state, sc.transactions, sc.curve, sc.market, SearchConfig(extra_grid=grid))
    assert refined.declared_profit >= base.declared_profit
    assert refined.declared_profit <= upper_bound(sc.initial_state, sc.transactions, sc.curve, sc.market)


def test_achieves_upper_bound_always_true_without_fee():
    for seed in range(10):
        sc = random_scenario(seed, max_n=5)
        ok, witness = achieves_upper_bound(sc.initial_state, sc.transactions, sc.curve, sc.market)
        assert ok and witness is not None


def test_determinism_across_threads():
    sc = random_scenario(11, n=5, fee=F(19, 100))
    args = (sc.initial_state, sc.transactions, sc.curve, sc.market)
    one = brute_force_optimal(*args, SearchConfig(threads=1))
    again = brute_force_optimal(*args, SearchConfig(threads=1))
    two = brute_force_optimal(*args, SearchConfig(threads=2))
    assert one == again == two


def test_optimize_dispatches_on_fee():
    tx = [Transaction.sell_x(F(10), 1)]
    assert optimize(S0, tx, CURVE, M0).declared_profit == F(10, 11)
    s = optimize(S0, [Transaction.sell_x(F(20), 1)], CURVE, M19)
    assert s.declared_profit == arbitragable_profit(S0, Transaction.sell_x(F(20)), CURVE, M19)


def test_strategy_json_shape():
    s = optimal_f0(S0, [Transaction.sell_x(F(10), 1)], CURVE, M0)
    out = s.to_json(F(10, 11))
    assert out["profit"] == "10/11" and out["gap"] == "0" and out["subset"] == [0]
    assert out["sequence"][1] == {"side": "sell_y", "qty": "100/11", "owner": "miner"}
    assert [t["side"] for t in out["sequence"]] == [Side.SELL_X.value, Side.SELL_Y.value]
