from fractions import Fraction

import pytest

from sixvertex.scalars import Context


@pytest.fixture
def ctx():
    """Generic rational point used across the suite."""
    return Context(Fraction(1, 2), lam=Fraction(3, 5), phi=Fraction(5, 7))


@pytest.fixture
def ctx_alt():
    return Context(Fraction(2, 3), lam=Fraction(3, 5), phi=Fraction(7, 4))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
