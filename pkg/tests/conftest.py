import numpy as np
import pytest

T_VEC = np.array([1, np.exp(1j * np.pi / 4)]) / np.sqrt(2)

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def t_state():
    return T_VEC.copy()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
