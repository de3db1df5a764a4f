"""Partition instances encoded as miner-profit decision problems.

For integers ``a_1..a_n`` with half-sum ``t``, build a constant-product pool whose
lower arbitrage edge sits exactly ``(1 - fee) * t`` below the start reserve, one
user ``sell_x(a_i)`` per integer, and two identical large ``sell_y`` orders. The
miner can earn the full upper bound only by walking the pool from the lower edge
back to the start with user sells of X summing to exactly ``t`` between the two
large sells of Y, so a balanced split exists iff the bound is reachable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .arbitrage import arb_bounds
from .curve import ConstantProduct
from .exchange import MarketContext, PoolState, Side, Transaction
from .scalar import rational_sqrt
from .strategy import SearchConfig, Strategy, achieves_upper_bound

DEFAULT_FEE = Fraction(19, 100)
Q_STAR_MARGIN = Fraction(6, 5)


@dataclass(frozen=True)
class PartitionInstance:
    integers: tuple
    half_sum: Fraction
    q_star: Fraction
    curve: ConstantProduct
    s0: PoolState
    market: MarketContext
    transactions: tuple  # sell_x(a_i) for user i+1, then two sell_y(q_star) for users n+1, n+2

    @property
    def lower(self) -> Fraction:
        return arb_bounds(self.curve, self.market).lower


def gen_partition_instance(
    integers: Sequence[int],
    fee: Fraction = DEFAULT_FEE,
    prices: tuple = (1, 1),
) -> PartitionInstance:
    ints = tuple(int(a) for a in integers)
    if not ints or any(a <= 0 for a in ints):
        raise ValueError(f"need a non-empty list of positive integers, got {list(integers)}")
    fee = Fraction(fee)
    if not 0 < fee < 1:
        raise ValueError(f"reduction needs 0 < fee < 1, got {fee}")
    root = rational_sqrt(1 - fee)
    if root is None:
        raise ValueError(f"sqrt(1 - fee) must be rational for an exact instance, got fee={fee}")
    p_x, p_y = Fraction(prices[0]), Fraction(prices[1])
    t = Fraction(sum(ints), 2)
    too_big = [a for a in ints if a > t]
    if too_big:
        raise ValueError(f"integers {too_big} exceed half the sum {t}; no balanced partition can exist")

    x0 = (1 - fee) * t / (1 - root)
    k = x0 * x0 * p_x / p_y
    curve = ConstantProduct(k)
    s0 = PoolState(x0, k / x0)
    market = MarketContext(p_x, p_y, fee)
    lower = root * x0
    assert x0 - lower == (1 - fee) * t

    # smallest sell_y that pushes the X reserve down to the lower edge, plus margin
    threshold = (k / lower - s0.y) / (1 - fee)
    q_star = threshold * Q_STAR_MARGIN
    assert k / (s0.y + (1 - fee) * q_star) < lower

    n = len(ints)
    txs = [Transaction.sell_x(Fraction(a), user=i + 1) for i, a in enumerate(ints)]
    txs += [Transaction.sell_y(q_star, user=n + 1), Transaction.sell_y(q_star, user=n + 2)]
    return PartitionInstance(ints, t, q_star, curve, s0, market, tuple(txs))


def extract_subset(instance: PartitionInstance, witness: Strategy) -> list:
    """Indices of integers whose sells run between the two large sells of Y."""
    n = len(instance.integers)
    big = [pos for pos, tx in enumerate(witness.sequence) if tx.user in (n + 1, n + 2)]
    if len(big) != 2:
        raise ValueError(f"witness does not execute both large sells of Y: {[str(t) for t in witness.sequence]}")
    between = witness.sequence[big[0] + 1 : big[1]]
    return sorted(tx.user - 1 for tx in between if not tx.is_miner and tx.side is Side.SELL_X)


def solve_partition_via_mev(
    integers: Sequence[int],
    fee: Fraction = DEFAULT_FEE,
    config: SearchConfig = SearchConfig(),
    prices: tuple = (1, 1),
) -> Optional[list]:
    """Indices of a subset summing to half the total, found through the miner search.

    Inputs with an integer above half the sum have no balanced split and return
    None without building an instance.
    """
    if integers and max(integers) > Fraction(sum(integers), 2):
        return None
    instance = gen_partition_instance(integers, fee, prices)
    ok, witness = achieves_upper_bound(instance.s0, instance.transactions, instance.curve, instance.market, config)
    if not ok:
        return None
    subset = extract_subset(instance, witness)
    assert sum(instance.integers[i] for i in subset) == instance.half_sum, subset
    return subset
