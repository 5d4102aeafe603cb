import sys

import numpy as np
import pytest

from projconsensus import Problem

PAPER_A = np.array([[1, 2, 3, 4],
                    [5, 6, 7, 8],
                    [3, 6, 9, 12],
                    [10, 12, 14, 16]], dtype=float)


@pytest.fixture
def paper_problem():
    """Four agents, one row of PAPER_A each, b = A (1,1,1,1)'."""
    return Problem.from_rows(PAPER_A, PAPER_A @ np.ones(4), m=4)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def random_projectors(rng, m, n):
    out = []
    for _ in range(m):
        k = rng.integers(0, n + 1)
        B = np.linalg.qr(rng.standard_normal((n, n)))[0][:, :k]
        out.append(B @ B.T)
    return np.array(out)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
