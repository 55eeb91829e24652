import cmath
import math
from pathlib import Path

import numpy as np
import pytest

DATA = Path(__file__).parent / "data"


def su2_euler(alpha, beta, gamma):
    """exp(-i alpha Z/2) exp(-i beta Y/2) exp(-i gamma Z/2), built entry by entry."""
    c, s = math.cos(beta / 2), math.sin(beta / 2)
    return np.array([
        [cmath.exp(-0.5j * (alpha + gamma)) * c, -cmath.exp(-0.5j * (alpha - gamma)) * s],
        [cmath.exp(0.5j * (alpha - gamma)) * s, cmath.exp(0.5j * (alpha + gamma)) * c],
    ])


def random_local(rng):
    a = su2_euler(*rng.uniform(0, 2 * np.pi, 3))
    b = su2_euler(*rng.uniform(0, 2 * np.pi, 3))
    return np.kron(a, b)


def random_unitary(rng, n=4):
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
