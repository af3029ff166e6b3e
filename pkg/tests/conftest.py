import os
import sys

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_full_rank(rng, m, d):
    while True:
        G = rng.standard_normal((m, d))
        if np.linalg.cond(G @ G.T) < 1e6:
            return G


# one (criterion, passed, detail) entry per acceptance criterion, printed at the end
ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    def record(number, ok, detail):
        ACCEPTANCE_LINES.append((number, bool(ok), detail))
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(ACCEPTANCE_LINES, key=lambda t: t[0]):
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
