import math

import numpy as np
import pytest

from kgzlab import grid as g

OMEGA_C = 1 / math.sqrt(2)


@pytest.fixture(scope="session")
def grid60():
    return g.make_grid(60.0, 1024)


@pytest.fixture(scope="session")
def grid40():
    return g.make_grid(40.0, 256)


@pytest.fixture(scope="session")
def small_grid():
    return g.make_grid(40.0, 128)


def band_limited(grid, rng, modes=12, complex_=False, zero_mean=False):
    """Random smooth periodic field built from a few low Fourier modes."""
    x = grid.x
    f = np.zeros(grid.points, dtype=complex if complex_ else float)
    for j in range(0 if not zero_mean else 1, modes):
        k = 2 * np.pi * j / grid.length
        c = rng.normal(size=2) / (1 + j)
        f = f + c[0] * np.cos(k * x) + c[1] * np.sin(k * x)
        if complex_:
            d = rng.normal(size=2) / (1 + j)
            f = f + 1j * (d[0] * np.cos(k * x) + d[1] * np.sin(k * x))
    return f


#: one verdict line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def record_criterion(number, ok, text):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {text}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
