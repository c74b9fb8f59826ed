import re

import numpy as np
import pytest

from ctcost.models import Ramp, lz_model

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


@pytest.fixture
def lz_ramp():
    return Ramp("cosine", -10.0, 5.0, 0.0, 1.0)


@pytest.fixture
def lz(lz_ramp):
    return lz_model(1.0, lz_ramp)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(re.match(r"\w+ criterion (\d+)", s).group(1))):
            terminalreporter.write_line(line)
