import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from signet.netbuild import SignedNetwork  # noqa: E402

CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_weight_matrix(rng, n, density=0.5, low=0.01, high=1.0):
    """Symmetric weights in (low, high] on a random edge subset, zero diagonal."""
    W = np.where(rng.random((n, n)) < density, rng.uniform(low, high, (n, n)), 0.0)
    W = np.triu(W, 1)
    return W + W.T


def make_net(W, kind="positive", theta=0.0, nodes=None):
    W = np.asarray(W, dtype=float)
    nodes = tuple(nodes) if nodes is not None else tuple(f"N{i:03d}" for i in range(len(W)))
    return SignedNetwork(kind, nodes, W, theta)


def star(n_leaves, w=0.4):
    W = np.zeros((n_leaves + 1, n_leaves + 1))
    W[0, 1:] = W[1:, 0] = w
    return W


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
