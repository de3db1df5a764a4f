import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gsrmev import ConstantProduct, MarketContext, PoolState  # noqa: E402


@pytest.fixture
def ref_curve():
    return ConstantProduct(Fraction(10000))


@pytest.fixture
def s0():
    return PoolState(Fraction(100), Fraction(100))


@pytest.fixture
def market0():
    return MarketContext(Fraction(1), Fraction(1), Fraction(0))


@pytest.fixture
def market19():
    return MarketContext(Fraction(1), Fraction(1), Fraction(19, 100))


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
