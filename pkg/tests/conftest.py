import math

import numpy as np
import pytest

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def qp_oracle(theta, L=1.0):
    """Zeta-regularised energy of the spectrum |2 pi n + theta| / L."""
    a = (theta % (2 * math.pi)) / (2 * math.pi)
    return -(math.pi / L) * (a * a - a + 1.0 / 6.0)
