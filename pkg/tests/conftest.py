import sys

import numpy as np
import pytest

from wonham_lab import ModelSpec

SYM = [[-1.0, 1.0], [1.0, -1.0]]


@pytest.fixture
def benchmark():
    """Symmetric two-state chain, h = (1, -1), sigma = 1, stationary start."""
    return ModelSpec(SYM, [1.0, -1.0], 1.0, [0.5, 0.5])


@pytest.fixture
def three_state():
    g = [[-1.5, 1.0, 0.5], [0.3, -0.8, 0.5], [1.2, 0.4, -1.6]]
    return ModelSpec(g, [1.0, 0.0, -2.0], 0.8)


def assert_simplex(pi, tol=1e-12):
    pi = np.asarray(pi)
    assert pi.min() >= 0.0
    assert np.abs(pi.sum(axis=-1) - 1.0).max() <= tol


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(lines):
        terminalreporter.write_line(lines[key])
