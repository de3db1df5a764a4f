"""Arbitrage against fixed exogenous prices.

With a fee, a single trade is unprofitable exactly while the X reserve sits
inside ``[lower, upper]``, where the marginal rate equals the price ratio
scaled by ``1/(1-fee)`` and ``(1-fee)`` respectively. Everything here measures
value in money at the exogenous prices ``p_x`` and ``p_y``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .curve import ConstantProduct, CurveParams, DomainError
from .exchange import (
    ExecutionTrace,
    MarketContext,
    PoolState,
    Side,
    Transaction,
    apply_tx,
    execute_sequence,
    miner_profit,
)
from .scalar import Scalar, is_exact, sqrt

CENTER_RTOL = 1e-9


@dataclass(frozen=True)
class ArbBounds:
    lower: Scalar  # X reserve where r = price_ratio / (1 - fee)
    upper: Scalar  # X reserve where r = price_ratio * (1 - fee)

    def contains(self, x: Scalar) -> bool:
        return self.lower <= x <= self.upper


def _bisect_rate(curve: CurveParams, target: float, guess: float = 1.0, max_iter: int = 200) -> float:
    # r is strictly decreasing, so the bracket [lo, hi] with r(lo) >= target >= r(hi) always narrows onto the root
    lo = hi = float(guess)
    while float(curve.marginal_rate(lo)) < target:
        lo /= 2.0
    while float(curve.marginal_rate(hi)) > target:
        hi *= 2.0
    width_tol = 1e-12 * float(guess)
    for _ in range(max_iter):
        if hi - lo < width_tol:
            break
        mid = 0.5 * (lo + hi)
        if float(curve.marginal_rate(mid)) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def center_reserve(curve: CurveParams, market: MarketContext) -> Scalar:
    """X reserve at which the marginal rate equals ``p_x / p_y``."""
    if isinstance(curve, ConstantProduct):
        return sqrt(curve.k * market.p_y / market.p_x)
    return _bisect_rate(curve, float(market.price_ratio))


def arb_bounds(curve: CurveParams, market: MarketContext) -> ArbBounds:
    f = market.fee
    if isinstance(curve, ConstantProduct):
        center = center_reserve(curve, market)
        root = sqrt(1 - f)
        return ArbBounds(root * center, center / root)
    ratio = float(market.price_ratio)
    guess = float(center_reserve(curve, market))
    lower = _bisect_rate(curve, ratio / (1 - float(f)), guess)
    upper = _bisect_rate(curve, ratio * (1 - float(f)), guess)
    return ArbBounds(lower, upper)


def is_centered(state: PoolState, curve: CurveParams, market: MarketContext, rtol: float = CENTER_RTOL) -> bool:
    rate = curve.marginal_rate(state.x)
    ratio = market.price_ratio
    if is_exact(rate, ratio):
        return rate == ratio
    return abs(rate - ratio) <= rtol * abs(ratio)


def require_centered(state: PoolState, curve: CurveParams, market: MarketContext) -> None:
    if not is_centered(state, curve, market):
        raise DomainError(
            f"initial state is not centered: marginal rate {float(curve.marginal_rate(state.x))!r} "
            f"!= p_x/p_y {float(market.price_ratio)!r} (use recenter())"
        )


def _single_step_profit(state: PoolState, tx: Transaction, curve: CurveParams, market: MarketContext) -> Scalar:
    return miner_profit(execute_sequence(state, [tx], curve, market), market)


def optimal_single_arb(
    state: PoolState,
    curve: CurveParams,
    market: MarketContext,
    bounds: Optional[ArbBounds] = None,
) -> Optional[tuple]:
    """Most profitable single miner trade from ``state``, or None inside the interval."""
    b = bounds or arb_bounds(curve, market)
    f = market.fee
    if state.x < b.lower:
        tx = Transaction.sell_x((b.lower - state.x) / (1 - f))
    elif state.x > b.upper:
        tx = Transaction.sell_y((curve.reserve_y(b.upper) - state.y) / (1 - f))
    else:
        return None
    return tx, _single_step_profit(state, tx, curve, market)


def recenter(state: PoolState, curve: CurveParams, market: MarketContext) -> tuple:
    """Move the pool to its centered reserve with one miner trade.

    Returns ``(new_state, tx)``; ``tx`` is None when already centered.
    """
    center = center_reserve(curve, market)
    f = market.fee
    if state.x == center or is_centered(state, curve, market):
        return state, None
    if state.x < center:
        tx = Transaction.sell_x((center - state.x) / (1 - f))
    else:
        tx = Transaction.sell_y((curve.reserve_y(center) - state.y) / (1 - f))
    new_state, _ = apply_tx(state, tx, curve, f)
    return new_state, tx


def arbitragable_profit(
    s0: PoolState,
    tx: Transaction,
    curve: CurveParams,
    market: MarketContext,
    bounds: Optional[ArbBounds] = None,
    check_centered: bool = True,
) -> Scalar:
    """Profit of back-running ``tx`` from ``s0`` to the nearer interval edge."""
    if check_centered:
        require_centered(s0, curve, market)
    b = bounds or arb_bounds(curve, market)
    f, px, py = market.fee, market.p_x, market.p_y
    if tx.side is Side.SELL_X:
        x_after = max(s0.x + (1 - f) * tx.quantity, b.upper)
        return (x_after - b.upper) * px - (curve.reserve_y(b.upper) - curve.reserve_y(x_after)) / (1 - f) * py
    x_after = min(curve.reserve_x(s0.y + (1 - f) * tx.quantity), b.lower)
    return (curve.reserve_y(x_after) - curve.reserve_y(b.lower)) * py - (b.lower - x_after) / (1 - f) * px


def upper_bound(
    s0: PoolState,
    user_txs: Iterable[Transaction],
    curve: CurveParams,
    market: MarketContext,
    bounds: Optional[ArbBounds] = None,
) -> Scalar:
    """Sum of arbitragable profits: no rule-abiding miner strategy earns more."""
    require_centered(s0, curve, market)
    b = bounds or arb_bounds(curve, market)
    total = Fraction(0) if is_exact(s0.x, market.fee) else 0.0
    for tx in user_txs:
        total = total + arbitragable_profit(s0, tx, curve, market, b, check_centered=False)
    return total


def potential(
    state: PoolState, curve: CurveParams, market: MarketContext, bounds: Optional[ArbBounds] = None
) -> Scalar:
    b = bounds or arb_bounds(curve, market)
    f, px, py = market.fee, market.p_x, market.p_y
    x = state.x
    if x > b.upper:
        return (x - b.upper) * px + (curve.reserve_y(x) - curve.reserve_y(b.upper)) / (1 - f) * py
    if x < b.lower:
        return (x - b.lower) / (1 - f) * px + (curve.reserve_y(x) - curve.reserve_y(b.lower)) * py
    return Fraction(0) if is_exact(x) else 0.0


@dataclass(frozen=True)
class PotentialTrace:
    phi: tuple  # potential after each step
    captured: tuple  # running sum of arbitragable profit of executed user transactions
    profit: tuple  # running miner profit

    def slack(self) -> list:
        """``captured - (profit + phi)`` per step.

        Non-negative on rule-abiding traces whose trades all run in the allowed
        direction; a trailing run of same-side trades the rule only tolerates as a
        tail can push it below zero.
        """
        return [v - (u + p) for u, p, v in zip(self.profit, self.phi, self.captured)]

    def max_violation(self) -> float:
        return max((float(-s) for s in self.slack()), default=0.0)


def potential_trace(trace: ExecutionTrace, curve: CurveParams, market: MarketContext) -> PotentialTrace:
    s0 = trace.initial
    b = arb_bounds(curve, market)
    require_centered(s0, curve, market)
    phis, caps = [], []
    acc = Fraction(0) if is_exact(s0.x, market.fee) else 0.0
    for step in trace.steps:
        if not step.tx.is_miner:
            acc = acc + arbitragable_profit(s0, step.tx, curve, market, b, check_centered=False)
        phis.append(potential(step.post, curve, market, b))
        caps.append(acc)
    return PotentialTrace(tuple(phis), tuple(caps), tuple(trace.cumulative_miner_profit))


def bounds_rate_residuals(curve: CurveParams, market: MarketContext, bounds: ArbBounds) -> tuple:
    """Relative residuals of the two defining rate equations (0 when exact)."""
    f = market.fee
    lhs_lo = curve.marginal_rate(bounds.lower) * (1 - f) * market.p_y
    lhs_hi = curve.marginal_rate(bounds.upper) * market.p_y
    rhs_lo = market.p_x
    rhs_hi = (1 - f) * market.p_x
    return (abs(lhs_lo - rhs_lo) / rhs_lo, abs(lhs_hi - rhs_hi) / rhs_hi)

