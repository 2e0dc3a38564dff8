import pytest

from toralmix.cones import Cone, QUADRANTS_13, analyze_cones, default_quadrant_cones, tilde_cones
from toralmix.lattice import MatrixFamily
from toralmix.observables import TrigObservable

A = [[2, 1], [1, 1]]
B = [[1, 1], [1, 2]]
SEPARATED_C = Cone((2, -1), (1, -2))


@pytest.fixture(scope="session")
def family():
    return MatrixFamily([A, B])


@pytest.fixture(scope="session")
def cat_family():
    return MatrixFamily([A, A])


@pytest.fixture(scope="session")
def quadrant_setup(family):
    E, C = default_quadrant_cones(family)
    T = family.tilde()
    Et, Ct = tilde_cones(E, C)
    return T, Et, Ct, analyze_cones(T, Et, Ct)


@pytest.fixture(scope="session")
def separated_setup(family):
    T = family.tilde()
    Et, Ct = tilde_cones(QUADRANTS_13, SEPARATED_C)
    return T, Et, Ct, analyze_cones(T, Et, Ct)


@pytest.fixture
def single_modes():
    return TrigObservable.mode((-2, 3)), TrigObservable.mode((1, 0))


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        status, label, secs, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {status}  {label} ({secs:.2f} s) {detail}")
