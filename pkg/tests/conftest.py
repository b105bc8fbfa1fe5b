import numpy as np
import pytest

from spraylab.model_space import GridFunctions, Product, Sequences
from spraylab.sets import circle_grid

ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def grid():
    return GridFunctions(L=2.0, h=0.01)


@pytest.fixture(scope="session")
def bundle(grid):
    return Product((grid, grid))


@pytest.fixture(scope="session")
def seq16():
    return Sequences(16)


@pytest.fixture(scope="session")
def loops():
    return circle_grid(64)


@pytest.fixture(scope="session")
def circle1():
    return GridFunctions.periodic_circle(64)
