import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from graphdirac.graph import build_graph

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# criterion number -> (title, passed, detail), filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")


def cycle(n, lengths=None):
    lengths = lengths or [1] * n
    return build_graph(list(range(n)), [(i, (i + 1) % n, lengths[i]) for i in range(n)])


def complete(n):
    return build_graph(list(range(n)), [(a, b) for a in range(n) for b in range(a + 1, n)])


@pytest.fixture
def c3():
    return cycle(3)


@pytest.fixture
def c4():
    return cycle(4)


@pytest.fixture
def k4():
    return complete(4)


@pytest.fixture
def edge():
    return build_graph(["a", "b"], [("a", "b")])


@pytest.fixture
def loop():
    return build_graph([0], [(0, 0)])
