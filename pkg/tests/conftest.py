import math

import numpy as np
import pytest

from qkr import kernels

ACCEPTANCE_LINES = []


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    """Kernel module for each compiled/pure implementation present."""
    return kernels.get_backend(request.param)


@pytest.fixture
def report_line():
    def emit(criterion, passed, detail):
        line = f"criterion {criterion:<4} {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: (int(s.split()[1].rstrip("ab")), s)):
            terminalreporter.write_line(line)


def wrapped_distance(a, b):
    d = (a - b) % (2.0 * math.pi)
    return min(d, 2.0 * math.pi - d)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
