import numpy as np
import pytest

from modspline import Sinusoid, SplineSpec, TimeGrid, sample


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def eeg_setup():
    """1000 samples over 10 s, five equidistant intervals, degree 4, omega 16."""
    grid = TimeGrid(np.linspace(0.0, 10.0, 1000))
    spec = SplineSpec.equidistant(4, 5, 0.0, 10.0)
    samples = sample(Sinusoid(16.0, 0.3), grid)
    return spec, grid, samples


ACCEPTANCE_LINES = []


def record_acceptance(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
