"""Miner strategies under the greedy sequencing rule.

Two solvers live here. :func:`optimal_f0` is the closed-form optimum for
fee-free pools: back-run every user trade straight back to the start state.
:func:`brute_force_optimal` is an exact search for small instances with any
fee; it is the only option once ``fee > 0``, where the problem is NP-hard.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .arbitrage import arb_bounds, arbitragable_profit, potential, require_centered, upper_bound
from .curve import CurveParams, DomainError
from .exchange import (
    MarketContext,
    PoolState,
    ReserveOverflowError,
    Side,
    Transaction,
    apply_tx,
    execute_sequence,
    sequence_to_json,
)
from .scalar import PROFIT_RTOL, RESERVE_ATOL, Scalar, close, format_scalar, is_exact
from .sequencing import direction_allowed, verify_gsr


class SearchSizeError(ValueError):
    """Instance has more user transactions than the search is configured for."""


@dataclass(frozen=True)
class SearchConfig:
    max_n: int = 8
    extra_grid: tuple = ()  # additional X-reserve targets for miner trades
    prune: bool = True
    threads: int = 1


@dataclass(frozen=True)
class Strategy:
    chosen_subset: frozenset  # indices into the user transaction list
    sequence: tuple  # users' and miner's transactions in execution order
    declared_profit: Scalar

    @property
    def miner_transactions(self) -> list:
        return [tx for tx in self.sequence if tx.is_miner]

    def to_json(self, bound: Optional[Scalar] = None) -> dict:
        out = {
            "subset": sorted(self.chosen_subset),
            "sequence": sequence_to_json(self.sequence),
            "profit": format_scalar(self.declared_profit),
        }
        if bound is not None:
            out["upper_bound"] = format_scalar(bound)
            out["gap"] = format_scalar(bound - self.declared_profit)
        return out


def _zero(*like: Scalar) -> Scalar:
    return Fraction(0) if is_exact(*like) else 0.0


def _finish(
    s0: PoolState,
    users: Sequence[Transaction],
    curve: CurveParams,
    market: MarketContext,
    moves: Sequence[tuple],
    expected: Optional[Scalar] = None,
) -> Strategy:
    """Replay ``moves`` (pairs of transaction and user index or None) into a checked Strategy."""
    sequence = tuple(tx for tx, _ in moves)
    chosen = frozenset(i for _, i in moves if i is not None)
    trace = execute_sequence(s0, sequence, curve, market)
    witness = verify_gsr(s0, sequence, curve, market.fee)
    assert witness.valid, witness
    profit = trace.final_profit
    if expected is not None:
        assert close(profit, expected, 1e-9, 1e-12), (profit, expected)
    return Strategy(chosen, sequence, profit)


def optimal_f0(
    s0: PoolState, user_txs: Sequence[Transaction], curve: CurveParams, market: MarketContext
) -> Strategy:
    """Fee-free optimum: each user trade is immediately undone by the miner.

    After every pair the pool is back at ``s0``, so every user trade is allowed
    and the miner collects each trade's full arbitragable profit.
    """
    if market.fee != 0:
        raise DomainError("optimal_f0 requires fee == 0; use brute_force_optimal for fee > 0")
    require_centered(s0, curve, market)
    moves = []
    for i, tx in enumerate(user_txs):
        moves.append((tx, i))
        if tx.side is Side.SELL_X:
            back = s0.y - curve.reserve_y(s0.x + tx.quantity)
            moves.append((Transaction.sell_y(back), None))
        else:
            back = s0.x - curve.reserve_x(s0.y + tx.quantity)
            moves.append((Transaction.sell_x(back), None))
    return _finish(s0, user_txs, curve, market, moves, upper_bound(s0, user_txs, curve, market))


# The search state is (pool state, remaining users, locked tail side, last move was the miner's).
# Once a trade runs against the direction the rule asks for, everything after it must sell the
# same token; ``tail`` records that commitment. At most one miner trade sits between user trades,
# and each miner trade lands the X reserve on a candidate target.


class _Search:
    def __init__(self, s0, users, curve, market, config):
        self.s0 = s0
        self.users = list(users)
        self.curve = curve
        self.market = market
        self.config = config
        self.bounds = arb_bounds(curve, market)
        self.ap = [arbitragable_profit(s0, tx, curve, market, self.bounds, check_centered=False) for tx in self.users]
        self.exact = is_exact(s0.x, s0.y, market.fee, market.p_x, market.p_y)
        targets = {self.bounds.lower, self.bounds.upper, s0.x}
        for g in config.extra_grid:
            targets.add(Fraction(g) if self.exact else float(g))
        self.targets = sorted(t for t in targets if t > 0)
        self.memo: dict = {}
        self.nodes = 0

    def rest_bound(self, mask: int) -> Scalar:
        total = _zero(self.s0.x) if self.exact else 0.0
        for i, ap in enumerate(self.ap):
            if mask >> i & 1:
                total = total + ap
        return total

    def optimistic(self, state: PoolState, mask: int) -> Scalar:
        return potential(state, self.curve, self.market, self.bounds) + self.rest_bound(mask)

    def reached(self, value: Scalar, bound: Scalar) -> bool:
        if self.exact:
            return value >= bound
        return value >= bound - PROFIT_RTOL * max(1.0, abs(bound))

    def _next_tail(self, side: Side, state: PoolState, tail: Optional[Side]):
        """Tail after running ``side`` now, or False when the rule forbids it."""
        if tail is not None:
            return tail if side is tail else False
        return None if direction_allowed(side, state, self.s0) else side

    def children(self, state: PoolState, mask: int, tail, last_miner: bool):
        f = self.market.fee
        for i, tx in enumerate(self.users):
            if not mask >> i & 1:
                continue
            new_tail = self._next_tail(tx.side, state, tail)
            if new_tail is False:
                continue
            try:
                post, _ = apply_tx(state, tx, self.curve, f)
            except (DomainError, ReserveOverflowError, ZeroDivisionError):
                continue
            yield (tx, i), post, _zero(state.x), mask & ~(1 << i), new_tail, False
        if last_miner:
            return
        px, py = self.market.p_x, self.market.p_y
        for target in self.targets:
            if target == state.x or (not self.exact and abs(target - state.x) <= RESERVE_ATOL):
                continue
            if target > state.x:
                tx = Transaction.sell_x((target - state.x) / (1 - f))
            else:
                tx = Transaction.sell_y((self.curve.reserve_y(target) - state.y) / (1 - f))
            new_tail = self._next_tail(tx.side, state, tail)
            if new_tail is False:
                continue
            post, received = apply_tx(state, tx, self.curve, f)
            if tx.side is Side.SELL_X:
                gain = received * py - tx.quantity * px
            else:
                gain = received * px - tx.quantity * py
            yield (tx, None), post, gain, mask, new_tail, True

    def solve(self, state: PoolState, mask: int, tail, last_miner: bool) -> tuple:
        """Best achievable future profit from this node, with the moves that achieve it."""
        key = (state.x, state.y, mask, tail, last_miner)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self.nodes += 1
        best = (_zero(state.x), ())  # stopping here is always allowed
        bound = self.optimistic(state, mask) if self.config.prune else None
        if bound is None or not self.reached(best[0], bound):
            for move, post, gain, new_mask, new_tail, miner in self.children(state, mask, tail, last_miner):
                if bound is not None and not gain + self.optimistic(post, new_mask) > best[0]:
                    continue
                value, rest = self.solve(post, new_mask, new_tail, miner)
                value = gain + value
                if value > best[0]:
                    best = (value, (move,) + rest)
                    if bound is not None and self.reached(value, bound):
                        break
        self.memo[key] = best
        return best


def _solve_child(args) -> tuple:
    s0, users, curve, market, config, index = args
    search = _Search(s0, users, curve, market, config)
    root = (s0, (1 << len(users)) - 1, None, False)
    for j, (move, post, gain, new_mask, new_tail, miner) in enumerate(search.children(*root)):
        if j == index:
            value, rest = search.solve(post, new_mask, new_tail, miner)
            return gain + value, (move,) + rest
    raise IndexError(index)


def brute_force_optimal(
    s0: PoolState,
    user_txs: Sequence[Transaction],
    curve: CurveParams,
    market: MarketContext,
    config: SearchConfig = SearchConfig(),
) -> Strategy:
    """Exact optimum over subsets, rule-abiding orders, and miner trades to candidate targets.

    Miner trades always land the X reserve on one of the interval edges, the
    start reserve, or a point from ``config.extra_grid``. Branches are cut when
    current profit plus potential plus the remaining users' arbitragable profit
    cannot beat the best sibling found so far.
    """
    users = list(user_txs)
    if len(users) > config.max_n:
        raise SearchSizeError(f"{len(users)} user transactions exceed the search limit of {config.max_n}")
    require_centered(s0, curve, market)
    search = _Search(s0, users, curve, market, config)
    root = (s0, (1 << len(users)) - 1, None, False)
    if config.threads > 1 and users:
        n_children = sum(1 for _ in search.children(*root))
        jobs = [(s0, users, curve, market, config, j) for j in range(n_children)]
        with ProcessPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(_solve_child, jobs))
        value, moves = _zero(s0.x), ()
        for v, m in results:  # first strictly better child wins, as in the sequential search
            if v > value:
                value, moves = v, m
    else:
        value, moves = search.solve(*root)
    return _finish(s0, users, curve, market, moves, value)


def achieves_upper_bound(
    s0: PoolState,
    user_txs: Sequence[Transaction],
    curve: CurveParams,
    market: MarketContext,
    config: SearchConfig = SearchConfig(),
) -> tuple:
    """Decide whether some rule-abiding strategy earns the full upper bound."""
    bound = upper_bound(s0, user_txs, curve, market)
    best = brute_force_optimal(s0, user_txs, curve, market, config)
    if is_exact(best.declared_profit, bound):
        hit = best.declared_profit == bound
    else:
        hit = close(best.declared_profit, bound, 1e-9, 1e-12)
    return hit, (best if hit else None)


def optimize(
    s0: PoolState,
    user_txs: Sequence[Transaction],
    curve: CurveParams,
    market: MarketContext,
    config: SearchConfig = SearchConfig(),
) -> Strategy:
    """Closed form when fee-free, exhaustive search otherwise."""
    if market.fee == 0:
        return optimal_f0(s0, user_txs, curve, market)
    return brute_force_optimal(s0, user_txs, curve, market, config)


__all__ = [
    "SearchConfig",
    "SearchSizeError",
    "Strategy",
    "achieves_upper_bound",
    "brute_force_optimal",
    "optimal_f0",
    "optimize",
]
