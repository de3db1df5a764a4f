"""Constant-function market maker invariants.

A curve is the level set ``F(x, y) = C``. Callers only ever need the three
derived functions: the reserve of Y at a given reserve of X, its inverse, and
the marginal exchange rate ``|dF_y/dx|``. Only the constant-product curve
``x * y = k`` ships here; other curves subclass :class:`CurveParams`.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction

from .scalar import Scalar


class DomainError(ValueError):
    """Raised for reserves or ranges outside the open positive quadrant."""


def _require_positive(name: str, value: Scalar) -> None:
    if not value > 0:
        raise DomainError(f"{name} must be positive, got {value}")


class CurveParams(ABC):
    kind: str = "abstract"

    @property
    @abstractmethod
    def constant(self) -> Scalar: ...

    @abstractmethod
    def reserve_y(self, x: Scalar) -> Scalar: ...

    @abstractmethod
    def reserve_x(self, y: Scalar) -> Scalar: ...

    @abstractmethod
    def marginal_rate(self, x: Scalar) -> Scalar: ...

    def on_curve(self, x: Scalar, y: Scalar, atol: float = 1e-9) -> bool:
        expected = self.reserve_y(x)
        if isinstance(expected, Fraction) and isinstance(y, Fraction):
            return expected == y
        return abs(expected - y) <= atol * max(1.0, abs(expected))


@dataclass(frozen=True)
class ConstantProduct(CurveParams):
    k: Scalar
    kind: str = field(default="constant_product", init=False)

    def __post_init__(self):
        _require_positive("k", self.k)

    @property
    def constant(self) -> Scalar:
        return self.k

    def reserve_y(self, x: Scalar) -> Scalar:
        _require_positive("x", x)
        return self.k / x

    def reserve_x(self, y: Scalar) -> Scalar:
        _require_positive("y", y)
        return self.k / y

    def marginal_rate(self, x: Scalar) -> Scalar:
        _require_positive("x", x)
        return self.k / (x * x)


def reserve_y(curve: CurveParams, x: Scalar) -> Scalar:
    return curve.reserve_y(x)


def reserve_x(curve: CurveParams, y: Scalar) -> Scalar:
    return curve.reserve_x(y)


def marginal_rate(curve: CurveParams, x: Scalar) -> Scalar:
    return curve.marginal_rate(x)


@dataclass
class AxiomReport:
    """Outcome of a sampled axiom check.

    ``monotone_violations`` holds grid pairs ``(x1, x2)`` with ``x1 < x2`` where
    the Y reserve did not strictly fall; ``rate_violations`` holds pairs where the
    marginal rate did not strictly fall; ``derivative_violations`` holds points
    where a central difference of ``reserve_y`` disagreed with ``-marginal_rate``.
    """

    samples: int
    monotone_violations: list = field(default_factory=list)
    rate_violations: list = field(default_factory=list)
    derivative_violations: list = field(default_factory=list)
    max_derivative_error: float = 0.0

    @property
    def axiom1(self) -> bool:
        return not self.monotone_violations

    @property
    def axiom2(self) -> bool:
        return not self.rate_violations and not self.derivative_violations

    @property
    def passed(self) -> bool:
        return self.axiom1 and self.axiom2

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "axiom1": self.axiom1,
            "axiom2": self.axiom2,
            "passed": self.passed,
            "max_derivative_error": self.max_derivative_error,
            "monotone_violations": [list(map(float, p)) for p in self.monotone_violations[:20]],
            "rate_violations": [list(map(float, p)) for p in self.rate_violations[:20]],
            "derivative_violations": [float(x) for x in self.derivative_violations[:20]],
        }


def check_axioms(
    curve: CurveParams,
    x_lo: float,
    x_hi: float,
    samples: int,
    rel_step: float = 1e-6,
    deriv_rtol: float = 1e-6,
) -> AxiomReport:
    """Check strict monotonicity of the curve and of its marginal rate on a grid.

    The derivative cross-check uses a central difference with step
    ``rel_step * x`` at each sample.
    """
    if not (0 < x_lo < x_hi) or samples < 2:
        raise DomainError(f"need 0 < x_lo < x_hi and samples >= 2, got ({x_lo}, {x_hi}, {samples})")
    x_lo, x_hi = float(x_lo), float(x_hi)
    step = (x_hi - x_lo) / (samples - 1)
    grid = [x_lo + i * step for i in range(samples)]
    grid[-1] = x_hi

    report = AxiomReport(samples=samples)
    ys = [float(curve.reserve_y(x)) for x in grid]
    rates = [float(curve.marginal_rate(x)) for x in grid]
    for i in range(samples - 1):
        x1, x2 = grid[i], grid[i + 1]
        # both directions of the iff: y falls, and the inverse preserves x order
        if not ys[i] > ys[i + 1] or not curve.reserve_x(ys[i]) < curve.reserve_x(ys[i + 1]):
            report.monotone_violations.append((x1, x2))
        if not rates[i] > rates[i + 1]:
            report.rate_violations.append((x1, x2))

    worst = 0.0
    for x, rate in zip(grid, rates):
        h = rel_step * x
        slope = (float(curve.reserve_y(x + h)) - float(curve.reserve_y(x - h))) / (2 * h)
        err = abs(slope + rate) / abs(rate) if rate else math.inf
        worst = max(worst, err)
        if err > deriv_rtol:
            report.derivative_violations.append(x)
    report.max_derivative_error = worst
    return report
