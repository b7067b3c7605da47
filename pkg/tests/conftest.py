import math
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from relteleport.field import DetectorConfig

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

GROUND = np.diag([1.0, 0.0]).astype(complex)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def timelike_pair():
    a = DetectorConfig("A", (0.0, 0.0, 0.0), 0.0, 30.0, 1.0)
    b = DetectorConfig("B", (2.0, 0.0, 0.0), 5.0, 0.5, 1.0)
    return a, b


@pytest.fixture
def spacelike_pair():
    a = DetectorConfig("A", (0.0, 0.0, 0.0), 0.0, 30.0, 0.2)
    b = DetectorConfig("B", (10.0, 0.0, 0.0), 0.0, 0.5, 0.2)
    return a, b


def random_timelike(rng, n):
    """Detector pairs with Bob clearly inside Alice's future lightcone."""
    out = []
    for _ in range(n):
        sa, sb = rng.uniform(0.3, 1.5, size=2)
        r = rng.uniform(0.0, 4.0)
        dt = r + (sa + sb) + rng.uniform(0.5, 4.0)
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        a = DetectorConfig("A", (0.0, 0.0, 0.0), 0.0, rng.uniform(0.5, 60.0), sa, monopole_phase=rng.uniform(0, 2 * math.pi))
        b = DetectorConfig("B", tuple(r * direction), dt, rng.uniform(0.05, 2.0), sb, monopole_phase=rng.uniform(0, 2 * math.pi))
        out.append((a, b))
    return out


def random_spacelike(rng, n):
    out = []
    for _ in range(n):
        sa, sb = rng.uniform(0.05, 0.3, size=2)
        dt = rng.uniform(0.0, 2.0)
        r = dt + 5 * (sa + sb) + rng.uniform(2.0, 8.0)
        a = DetectorConfig("A", (0.0, 0.0, 0.0), 0.0, rng.uniform(0.5, 60.0), sa)
        b = DetectorConfig("B", (0.0, r, 0.0), dt, rng.uniform(0.05, 2.0), sb)
        out.append((a, b))
    return out


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda s: int(s.split("criterion")[1].split(":")[0].split()[0])):
        terminalreporter.write_line(line)
