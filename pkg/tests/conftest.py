import gc

import numpy as np
import pytest

from mmsample import build_from_points

# (criterion, passed, detail) lines collected by the acceptance module
ACCEPTANCE_LINES: list = []


def record(criterion: str, passed: bool, detail: str = "") -> bool:
    line = f"[{'PASS' if passed else 'FAIL'}] {criterion}" + (f": {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def unit_grid(n: int, normalized: bool = True):
    """Cell-centred n x n grid on [0, 1]^2 with uniform masses."""
    c = (np.arange(n) + 0.5) / n
    x, y = np.meshgrid(c, c, indexing="ij")
    pts = np.c_[x.ravel(), y.ravel()]
    mass = np.full(n * n, 1.0 / n**2 if normalized else 1.0)
    return build_from_points(pts, mass)


@pytest.fixture
def square4():
    return build_from_points([[0, 0], [1, 0], [0, 1], [1, 1]])


@pytest.fixture
def line3():
    return build_from_points([[0.0], [1.0], [2.0]])


@pytest.fixture(autouse=True, scope="module")
def _collect():
    yield
    gc.collect()


def central_grad(f, x, h: float = 1e-6):
    """Central finite-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g
