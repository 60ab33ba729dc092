import math

import numpy as np
import pytest

from kinsa.model import CATALOG, builtin

ROBOTS = sorted(CATALOG)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(params=ROBOTS)
def robot(request):
    return builtin(request.param)


def random_q(rng, size=None, n=6):
    shape = (n,) if size is None else (size, n)
    return rng.uniform(-math.pi, math.pi, size=shape)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
