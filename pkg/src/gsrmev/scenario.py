"""Scenario files and seeded scenario generators.

Schema::

    {"curve": {"kind": "constant_product", "k": "10000"},
     "state0": {"x": "100", "y": "100"},
     "market": {"p_x": "1", "p_y": "1", "fee": "0"},
     "numeric_mode": "exact",
     "transactions": [{"side": "sell_x", "qty": "10", "owner": {"user": 1}}]}

Every scalar is a decimal string or a ``"p/q"`` rational string.
"""

from __future__ import annotations

import enum
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, Union

from .curve import ConstantProduct, CurveParams, DomainError
from .exchange import MarketContext, PoolState, Side, Transaction
from .scalar import format_scalar, parse_scalar, rational_sqrt


class ScenarioError(ValueError):
    """Scenario input that fails to parse or validate."""


class NumericMode(enum.Enum):
    EXACT = "exact"
    FLOAT = "float"


@dataclass(frozen=True)
class Scenario:
    curve: CurveParams
    initial_state: PoolState
    market: MarketContext
    transactions: tuple = ()
    numeric_mode: NumericMode = NumericMode.EXACT
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def exact(self) -> bool:
        return self.numeric_mode is NumericMode.EXACT

    def to_json(self) -> dict:
        return {
            "curve": {"kind": self.curve.kind, "k": format_scalar(self.curve.constant)},
            "state0": {"x": format_scalar(self.initial_state.x), "y": format_scalar(self.initial_state.y)},
            "market": {
                "p_x": format_scalar(self.market.p_x),
                "p_y": format_scalar(self.market.p_y),
                "fee": format_scalar(self.market.fee),
            },
            "numeric_mode": self.numeric_mode.value,
            "transactions": [tx.to_json() for tx in self.transactions],
        }


def _field(obj: dict, path: str):
    cur = obj
    for part in path.split("."):
        if not isinstance(cur, dict) or part not in cur:
            raise ScenarioError(f"missing field '{path}'")
        cur = cur[part]
    return cur


def _scalar(obj: dict, path: str, exact: bool):
    raw = _field(obj, path)
    try:
        return parse_scalar(raw, exact)
    except ValueError as exc:
        raise ScenarioError(f"field '{path}': {exc}") from exc


def scenario_from_json(obj: dict) -> Scenario:
    if not isinstance(obj, dict):
        raise ScenarioError("scenario must be a JSON object")
    mode_raw = obj.get("numeric_mode", "exact")
    try:
        mode = NumericMode(mode_raw)
    except ValueError as exc:
        raise ScenarioError(f"field 'numeric_mode' must be 'exact' or 'float', got {mode_raw!r}") from exc
    exact = mode is NumericMode.EXACT

    kind = _field(obj, "curve.kind")
    if kind != "constant_product":
        raise ScenarioError(f"field 'curve.kind': only 'constant_product' is supported, got {kind!r}")
    k = _scalar(obj, "curve.k", exact)
    x0 = _scalar(obj, "state0.x", exact)
    y0 = _scalar(obj, "state0.y", exact)
    p_x = _scalar(obj, "market.p_x", exact)
    p_y = _scalar(obj, "market.p_y", exact)
    fee = _scalar(obj, "market.fee", exact)
    try:
        curve = ConstantProduct(k)
        market = MarketContext(p_x, p_y, fee)
    except DomainError as exc:
        raise ScenarioError(str(exc)) from exc
    if not (x0 > 0 and y0 > 0):
        raise ScenarioError(f"field 'state0': reserves must be positive, got ({x0}, {y0})")
    if not curve.on_curve(x0, y0):
        raise ScenarioError(f"field 'state0': x*y = {x0 * y0} does not equal curve.k = {k}")
    if exact and rational_sqrt(1 - fee) is None:
        raise ScenarioError(
            f"field 'market.fee': numeric_mode 'exact' needs a rational sqrt(1 - fee), got fee={fee}; use 'float'"
        )

    raw_txs = obj.get("transactions", [])
    if not isinstance(raw_txs, list):
        raise ScenarioError("field 'transactions' must be a list")
    txs = []
    for i, raw in enumerate(raw_txs):
        try:
            txs.append(Transaction.from_json(raw, exact))
        except (ValueError, TypeError, AttributeError) as exc:
            raise ScenarioError(f"field 'transactions[{i}]': {exc}") from exc
    return Scenario(curve, PoolState(x0, y0), market, tuple(txs), mode)


def load_scenario(source: Union[str, IO]) -> Scenario:
    """Load and validate a scenario from a path or an open text stream."""
    try:
        if hasattr(source, "read"):
            obj = json.load(source)
        else:
            with open(source) as fh:
                obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc}") from exc
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc}") from exc
    return scenario_from_json(obj)


def random_scenario(
    seed: int = 0,
    n: int | None = None,
    max_n: int = 20,
    fee=Fraction(0),
    max_fraction=Fraction(3, 5),
) -> Scenario:
    """A centered constant-product scenario with ``n`` random user sells.

    Reserves are random integers, so ``k`` and the centering price ratio are
    rational. The scenario is exact when ``sqrt(1 - fee)`` is rational and
    float otherwise. Quantities range up to ``max_fraction`` of the sold
    token's reserve.
    """
    rng = random.Random(seed)
    fee = Fraction(fee)
    if n is None:
        n = rng.randint(1, max_n)
    x0 = Fraction(rng.randint(50, 500))
    y0 = Fraction(rng.randint(50, 500))
    scale = max_fraction * 1000
    txs = []
    for user in range(1, n + 1):
        side = rng.choice((Side.SELL_X, Side.SELL_Y))
        reserve = x0 if side is Side.SELL_X else y0
        qty = Fraction(rng.randint(1, int(scale)), 1000) * reserve
        txs.append(Transaction(side, qty, user))
    exact = rational_sqrt(1 - fee) is not None
    # p_x / p_y = y0 / x0 makes the start state centered
    scenario = Scenario(
        ConstantProduct(x0 * y0),
        PoolState(x0, y0),
        MarketContext(y0 / x0, Fraction(1), fee),
        tuple(txs),
        NumericMode.EXACT,
    )
    return scenario if exact else to_float(scenario)


def to_float(scenario: Scenario) -> Scenario:
    """The same scenario with every scalar converted to float."""
    s0, m = scenario.initial_state, scenario.market
    return Scenario(
        ConstantProduct(float(scenario.curve.constant)),
        PoolState(float(s0.x), float(s0.y)),
        MarketContext(float(m.p_x), float(m.p_y), float(m.fee)),
        tuple(Transaction(t.side, float(t.quantity), t.user) for t in scenario.transactions),
        NumericMode.FLOAT,
    )


def random_multiset(seed: int = 0, max_n: int = 6, lo: int = 1, hi: int = 9, require_wlog: bool = True) -> list:
    """Random positive integers; with ``require_wlog`` every item is at most half the sum."""
    rng = random.Random(seed)
    while True:
        n = rng.randint(1, max_n)
        ints = [rng.randint(lo, hi) for _ in range(n)]
        if not require_wlog or 2 * max(ints) <= sum(ints):
            return ints
