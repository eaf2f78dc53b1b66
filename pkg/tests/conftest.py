import numpy as np
import pytest

from wavebreak.spectral import Field, GridSpec

ACCEPTANCE_LINES = []


@pytest.fixture
def gauss_grid():
    return GridSpec(20.0, 512)


@pytest.fixture
def box():
    return GridSpec(40.0, 1024)


def slope_profile(grid, a=1.0, w=1.0):
    return Field.from_function(grid, lambda x: -a * x * np.exp(-x ** 2 / (2 * w * w)))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
