import numpy as np
import pytest

from pinlab import renewal

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def law15():
    return renewal.build_power_law(1.5, 64)


@pytest.fixture(scope="session")
def law07():
    return renewal.build_power_law(0.7, 64)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
