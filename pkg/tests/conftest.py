from pathlib import Path

import numpy as np
import pytest

from evofis.timeseries import RegressorPair

FIXTURES = Path(__file__).parent / "fixtures"

# PASS/FAIL lines from the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES = []

CLUSTER_A = np.full(4, 0.2)
CLUSTER_B = np.full(4, 0.8)


def cluster_pair(rng, center, level, spread=0.01):
    u = center + spread * rng.standard_normal(center.size)
    return RegressorPair(u, np.array([level + 0.5 * (u[0] - center[0])]), 0)


def two_cluster_stream(seed=0, head=50, middle=100, alternating=200):
    """A block at cluster A, a longer block at B, then strict alternation."""
    rng = np.random.default_rng(seed)
    seq = [cluster_pair(rng, CLUSTER_A, 0.3) for _ in range(head)]
    seq += [cluster_pair(rng, CLUSTER_B, 0.7) for _ in range(middle)]
    for i in range(alternating):
        seq.append(cluster_pair(rng, CLUSTER_A, 0.3) if i % 2 == 0 else cluster_pair(rng, CLUSTER_B, 0.7))
    return seq


def alternating_stream(seed=0, length=300):
    rng = np.random.default_rng(seed)
    return [
        cluster_pair(rng, CLUSTER_A, 0.3) if i % 2 == 0 else cluster_pair(rng, CLUSTER_B, 0.7)
        for i in range(length)
    ]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
