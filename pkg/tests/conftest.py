import os
import sys
from pathlib import Path

import numpy as np
import pytest

from segfrechet import HorizontalSegment, Trajectory

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"

sys.path.insert(0, str(Path(__file__).parent))

# filled by tests/test_acceptance.py, printed once at the end of the run
ACCEPTANCE_LINES = {}


def random_instance(rng, n_max=12, n_min=2, box=10.0):
    """Trajectory, non-vertex u <= v and a horizontal segment, all inside the box."""
    n = int(rng.integers(n_min, n_max + 1))
    traj = Trajectory(rng.uniform(-box, box, size=(n, 2)).tolist())
    a, b = np.sort(rng.uniform(0.0, n - 1, size=2))
    u, v = traj.pos_at_param(float(a)), traj.pos_at_param(float(b))
    x0, x1 = np.sort(rng.uniform(-box, box, size=2))
    seg = HorizontalSegment(float(x0), float(x1), float(rng.uniform(-box, box)))
    return traj, u, v, seg


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def data_dir():
    return DATA


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
