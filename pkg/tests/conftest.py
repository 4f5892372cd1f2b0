import numpy as np
import pytest

from wcavity.model import SystemParams, atomic_state, density


@pytest.fixture
def p4():
    return SystemParams(4, nu=10.0, delta=10.0)


def excite_first(n):
    return atomic_state(np.eye(n)[0])


def excite_first_rho(n):
    return density(excite_first(n))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
