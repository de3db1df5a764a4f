"""Transaction execution against a single pool, with trading fees.

Sells are exact-in: the seller pays ``q`` of one token, a fraction ``fee`` of it
is withheld, and the remaining ``(1 - fee) * q`` is added to the pool's reserve.
The seller receives whatever the curve releases of the other token. Withheld
fees leave the system; nobody is credited with them.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .curve import CurveParams, DomainError
from .scalar import Scalar, format_scalar, is_exact, parse_scalar


class ReserveOverflowError(ArithmeticError):
    """A float-mode trade pushed a reserve to zero, infinity, or NaN."""


class ExecutionError(ValueError):
    def __init__(self, index: int, cause: Exception):
        super().__init__(f"transaction {index}: {cause}")
        self.index = index
        self.cause = cause


class Side(enum.Enum):
    SELL_X = "sell_x"
    SELL_Y = "sell_y"

    @property
    def opposite(self) -> "Side":
        return Side.SELL_Y if self is Side.SELL_X else Side.SELL_X


@dataclass(frozen=True)
class MarketContext:
    p_x: Scalar
    p_y: Scalar
    fee: Scalar = Fraction(0)

    def __post_init__(self):
        if not (self.p_x > 0 and self.p_y > 0):
            raise DomainError(f"prices must be positive, got p_x={self.p_x}, p_y={self.p_y}")
        if not (0 <= self.fee < 1):
            raise DomainError(f"fee must lie in [0, 1), got {self.fee}")

    @property
    def price_ratio(self) -> Scalar:
        return self.p_x / self.p_y


@dataclass(frozen=True)
class PoolState:
    x: Scalar
    y: Scalar

    def __iter__(self):
        yield self.x
        yield self.y


@dataclass(frozen=True)
class Transaction:
    """A sell order. ``user`` is the submitting user's id, or None for the miner."""

    side: Side
    quantity: Scalar
    user: Optional[int] = None

    def __post_init__(self):
        if not self.quantity > 0:
            raise DomainError(f"transaction quantity must be positive, got {self.quantity}")

    @property
    def is_miner(self) -> bool:
        return self.user is None

    @classmethod
    def sell_x(cls, quantity, user=None) -> "Transaction":
        return cls(Side.SELL_X, quantity, user)

    @classmethod
    def sell_y(cls, quantity, user=None) -> "Transaction":
        return cls(Side.SELL_Y, quantity, user)

    def to_json(self) -> dict:
        return {
            "side": self.side.value,
            "qty": format_scalar(self.quantity),
            "owner": "miner" if self.is_miner else {"user": self.user},
        }

    @classmethod
    def from_json(cls, obj: dict, exact: bool = True) -> "Transaction":
        try:
            side = Side(obj["side"])
        except (KeyError, ValueError) as exc:
            raise ValueError(f"transaction side must be 'sell_x' or 'sell_y': {obj!r}") from exc
        owner = obj.get("owner", "miner")
        if owner == "miner":
            user = None
        elif isinstance(owner, dict) and isinstance(owner.get("user"), int) and not isinstance(owner["user"], bool):
            user = owner["user"]
        else:
            raise ValueError(f"transaction owner must be 'miner' or {{'user': <int>}}: {owner!r}")
        if "qty" not in obj:
            raise ValueError(f"transaction is missing 'qty': {obj!r}")
        return cls(side, parse_scalar(obj["qty"], exact), user)

    def __str__(self):
        who = "miner" if self.is_miner else f"user{self.user}"
        return f"{who}:{self.side.value}({format_scalar(self.quantity)})"


@dataclass(frozen=True)
class Step:
    tx: Transaction
    pre: PoolState
    post: PoolState
    paid: Scalar  # gross units of the sold token
    received: Scalar  # units of the other token, net of fee


@dataclass(frozen=True)
class ExecutionTrace:
    initial: PoolState
    steps: tuple = ()
    cumulative_miner_profit: tuple = ()

    @property
    def final_state(self) -> PoolState:
        return self.steps[-1].post if self.steps else self.initial

    @property
    def final_profit(self) -> Scalar:
        if self.cumulative_miner_profit:
            return self.cumulative_miner_profit[-1]
        return Fraction(0) if is_exact(self.initial.x) else 0.0

    def states(self) -> list:
        return [self.initial] + [s.post for s in self.steps]

    def to_jsonl(self) -> str:
        lines = []
        for i, (step, cum) in enumerate(zip(self.steps, self.cumulative_miner_profit), start=1):
            lines.append(
                json.dumps(
                    {
                        "index": i,
                        "side": step.tx.side.value,
                        "owner": "miner" if step.tx.is_miner else {"user": step.tx.user},
                        "qty": format_scalar(step.tx.quantity),
                        "paid": format_scalar(step.paid),
                        "received": format_scalar(step.received),
                        "x": format_scalar(step.post.x),
                        "y": format_scalar(step.post.y),
                        "miner_profit_cum": format_scalar(cum),
                    }
                )
            )
        return "\n".join(lines) + ("\n" if lines else "")


def _check_reserve(value: Scalar) -> None:
    if isinstance(value, float) and (not math.isfinite(value) or value <= 0.0):
        raise ReserveOverflowError(f"reserve left the open quadrant: {value}")


def apply_tx(state: PoolState, tx: Transaction, curve: CurveParams, fee: Scalar) -> tuple[PoolState, Scalar]:
    """Execute one sell from ``state``; return the new state and the amount received."""
    net_in = (1 - fee) * tx.quantity
    if tx.side is Side.SELL_X:
        x = state.x + net_in
        _check_reserve(x)
        y = curve.reserve_y(x)
        _check_reserve(y)
        received = state.y - y
    else:
        y = state.y + net_in
        _check_reserve(y)
        x = curve.reserve_x(y)
        _check_reserve(x)
        received = state.x - x
    return PoolState(x, y), received


def _formula_profit(pre: PoolState, post: PoolState, market: MarketContext) -> Scalar:
    # reserve deltas grossed up by the fee on whichever side increased
    f = market.fee
    dx = (pre.x - post.x) / (1 - f if post.x > pre.x else 1)
    dy = (pre.y - post.y) / (1 - f if post.y > pre.y else 1)
    return dx * market.p_x + dy * market.p_y


def _receipt_profit(step: Step, market: MarketContext) -> Scalar:
    if step.tx.side is Side.SELL_X:
        return step.received * market.p_y - step.paid * market.p_x
    return step.received * market.p_x - step.paid * market.p_y


def execute_sequence(
    s0: PoolState, txs: Iterable[Transaction], curve: CurveParams, market: MarketContext
) -> ExecutionTrace:
    steps = []
    cumulative = []
    profit = Fraction(0) if is_exact(s0.x, s0.y) else 0.0
    state = s0
    for i, tx in enumerate(txs):
        try:
            post, received = apply_tx(state, tx, curve, market.fee)
        except (DomainError, ReserveOverflowError, ZeroDivisionError) as exc:
            raise ExecutionError(i, exc) from exc
        step = Step(tx, state, post, tx.quantity, received)
        if tx.is_miner:
            gain = _receipt_profit(step, market)
            formula = _formula_profit(state, post, market)
            if is_exact(gain, formula):
                assert gain == formula, (gain, formula)
            else:
                scale = abs(step.received) + abs(step.paid) + 1.0
                assert abs(gain - formula) <= 1e-9 * scale * max(market.p_x, market.p_y), (gain, formula)
            profit = profit + gain
        steps.append(step)
        cumulative.append(profit)
        state = post
    return ExecutionTrace(s0, tuple(steps), tuple(cumulative))


def miner_profit(trace: ExecutionTrace, market: MarketContext) -> Scalar:
    """Miner profit recomputed from the trace's reserve deltas."""
    total = Fraction(0) if is_exact(trace.initial.x) else 0.0
    for step in trace.steps:
        if step.tx.is_miner:
            total = total + _formula_profit(step.pre, step.post, market)
    return total


def user_receipts(trace: ExecutionTrace) -> dict:
    receipts: dict = {}
    for step in trace.steps:
        if not step.tx.is_miner:
            receipts.setdefault(step.tx.user, []).append((step.paid, step.received))
    return receipts


def standalone_receipt(s0: PoolState, tx: Transaction, curve: CurveParams, fee: Scalar) -> Scalar:
    return apply_tx(s0, tx, curve, fee)[1]


def user_value_change(trace: ExecutionTrace, market: MarketContext) -> Scalar:
    """Net value, at exogenous prices, that user transactions gained across the trace."""
    total = Fraction(0) if is_exact(trace.initial.x) else 0.0
    for step in trace.steps:
        if not step.tx.is_miner:
            total = total + _receipt_profit(step, market)
    return total


def sequence_to_json(txs: Sequence[Transaction]) -> list:
    return [tx.to_json() for tx in txs]
