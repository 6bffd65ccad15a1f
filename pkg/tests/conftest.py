from fractions import Fraction

import pytest

from mabinogion.recursion import ChainSpec


def m_chain(N):
    """Uncontrolled urn with N balls, states indexed by the black count."""
    return ChainSpec(
        states=range(N + 1),
        transition=lambda b: [(b - 1, Fraction(N - b, N)), (b + 1, Fraction(b, N))],
        absorbing=lambda b: b in (0, N),
        step_cost=lambda b: 1,
        terminal_payoff=lambda b: b,
    )


@pytest.fixture
def urn_chain():
    return m_chain


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
