import math

import pytest
from scipy.constants import c

from cpforge.atom import two_level
from cpforge.materials import Material

W = 1.0e15          # reference transition frequency (rad/s)
L = c / W           # matching length unit (m)


@pytest.fixture
def atom():
    return two_level(W, beta=1e-7)


@pytest.fixture
def wall_material():
    """Electric and magnetic resonance set used by the wall and cavity scenarios."""
    return Material.drude_lorentz([(0.75, 1.03, 0.001)], [(2.0, 1.0, 0.001)], unit=W)


@pytest.fixture
def dielectric():
    return Material.drude_lorentz([(0.75, 1.03, 0.001)], unit=W)


def rel(a, b):
    return abs(a - b) / abs(b) if b else abs(a)


def loglog_slope(x, y):
    import numpy as np

    return float(np.polyfit(np.log(x), np.log(np.abs(y)), 1)[0])


__all__ = ["W", "L", "rel", "loglog_slope", "math"]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
