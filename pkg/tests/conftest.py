import numpy as np
import pytest

from lsreinit.mesh import generate_cartesian, generate_perturbed
from lsreinit.space import Space


@pytest.fixture
def cart_space():
    return Space(generate_cartesian((0, 0), (1, 1), (4, 4)), 3)


@pytest.fixture
def pert_space():
    return Space(generate_perturbed((0, 0), (1, 1), (5, 4), amplitude=0.25, seed=7), 3)


def nodal(space, f):
    x = space.metrics.x
    return np.asarray(f(*np.moveaxis(x, -1, 0)), dtype=float)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
