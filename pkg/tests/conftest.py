import numpy as np
import pytest

from lgswe.mesh import gen_square_mesh


@pytest.fixture(scope="session")
def unit8():
    return gen_square_mesh(1.0, 8)


@pytest.fixture(scope="session")
def jitter8():
    return gen_square_mesh(1.0, 8, perturbation=0.2, seed=3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


TWO_TRIANGLES = """smf 1
# unit square split along its diagonal
vertices 4
0 0
1 0
1 1
0 1
triangles 2
0 1 2
0 2 3
boundary_edges 4
0 1 0
1 2 0
2 3 0
3 0 0
"""


# one summary line per acceptance criterion, filled by test_acceptance
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
