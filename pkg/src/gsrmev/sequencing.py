"""Greedy sequencing rule: verification and order construction.

A sell of X may run at position i only if the pool's X reserve before it is
at most the block's starting X reserve, or every later transaction also sells
X. Sells of Y are constrained symmetrically on the Y reserve.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

from .curve import CurveParams
from .exchange import ExecutionError, PoolState, Side, Transaction, apply_tx
from .scalar import Scalar, leq


class ViolationReason(enum.Enum):
    WRONG_DIRECTION_X = "wrong_direction_x"
    WRONG_DIRECTION_Y = "wrong_direction_y"


class Tiebreak(enum.Enum):
    INPUT_ORDER = "input_order"
    BY_QUANTITY_ASC = "by_quantity_asc"


@dataclass(frozen=True)
class Violation:
    position: int  # 1-based
    reason: ViolationReason


@dataclass(frozen=True)
class OrderWitness:
    order: tuple
    valid: bool
    first_violation: Optional[Violation] = None

    def to_json(self) -> dict:
        v = self.first_violation
        return {
            "order": list(self.order),
            "valid": self.valid,
            "first_violation": None if v is None else {"position": v.position, "reason": v.reason.value},
        }


def direction_allowed(side: Side, state: PoolState, s0: PoolState) -> bool:
    """True when ``side`` moves the pool back toward (or holds it at) ``s0``."""
    if side is Side.SELL_X:
        return leq(state.x, s0.x)
    return leq(state.y, s0.y)


def verify_gsr(
    s0: PoolState,
    txs: Sequence[Transaction],
    curve: CurveParams,
    fee: Scalar,
    order: Optional[Sequence[int]] = None,
) -> OrderWitness:
    """Replay ``txs`` (optionally permuted by ``order``) and check the rule."""
    if order is None:
        order = range(len(txs))
    order = tuple(order)
    if len(set(order)) != len(order) or any(not 0 <= i < len(txs) for i in order):
        raise ValueError(f"order must be distinct indices into {len(txs)} transactions: {list(order)}")
    seq = [txs[i] for i in order]
    n = len(seq)

    # homogeneous[i]: every transaction from i to the end sells the same token as seq[i]
    homogeneous = [True] * n
    for i in range(n - 2, -1, -1):
        homogeneous[i] = seq[i].side is seq[i + 1].side and homogeneous[i + 1]

    state = s0
    for i, tx in enumerate(seq):
        if not (direction_allowed(tx.side, state, s0) or homogeneous[i]):
            reason = ViolationReason.WRONG_DIRECTION_X if tx.side is Side.SELL_X else ViolationReason.WRONG_DIRECTION_Y
            return OrderWitness(order, False, Violation(i + 1, reason))
        try:
            state, _ = apply_tx(state, tx, curve, fee)
        except (ValueError, ArithmeticError) as exc:
            raise ExecutionError(i, exc) from exc
    return OrderWitness(order, True)


def greedy_order_indices(
    s0: PoolState,
    txs: Sequence[Transaction],
    curve: CurveParams,
    fee: Scalar,
    tiebreak: Tiebreak = Tiebreak.INPUT_ORDER,
) -> list:
    if tiebreak is Tiebreak.BY_QUANTITY_ASC:
        ranked = sorted(range(len(txs)), key=lambda i: (txs[i].quantity, i))
    else:
        ranked = list(range(len(txs)))
    pending = {Side.SELL_X: [i for i in ranked if txs[i].side is Side.SELL_X],
               Side.SELL_Y: [i for i in ranked if txs[i].side is Side.SELL_Y]}
    rank = {i: r for r, i in enumerate(ranked)}

    out = []
    state = s0
    while pending[Side.SELL_X] and pending[Side.SELL_Y]:
        x_ok = direction_allowed(Side.SELL_X, state, s0)
        y_ok = direction_allowed(Side.SELL_Y, state, s0)
        if x_ok and y_ok:
            a, b = pending[Side.SELL_X][0], pending[Side.SELL_Y][0]
            side = Side.SELL_X if rank[a] < rank[b] else Side.SELL_Y
        else:
            side = Side.SELL_X if x_ok else Side.SELL_Y
        i = pending[side].pop(0)
        out.append(i)
        state, _ = apply_tx(state, txs[i], curve, fee)
    # one side is exhausted; the rest is a homogeneous suffix
    out.extend(pending[Side.SELL_X] or pending[Side.SELL_Y])
    return out


def greedy_order(
    s0: PoolState,
    txs: Sequence[Transaction],
    curve: CurveParams,
    fee: Scalar,
    tiebreak: Tiebreak = Tiebreak.INPUT_ORDER,
) -> list:
    """An order of ``txs`` that the greedy sequencing rule accepts."""
    return [txs[i] for i in greedy_order_indices(s0, txs, curve, fee, tiebreak)]
