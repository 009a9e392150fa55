import math

import numpy as np
import pytest

from sqzsync import SystemParams

VACUUM = SystemParams()
THERMAL = SystemParams(n=1.0)
SQ_VACUUM = SystemParams(r=1.5)
SQ_THERMAL = SystemParams(n=1.0, r=1.5)
RESERVOIRS = {"vacuum": VACUUM, "thermal": THERMAL, "sq_vacuum": SQ_VACUUM, "sq_thermal": SQ_THERMAL}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def unit(v):
    return v / math.sqrt(sum(x * x for x in v))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
