import pytest

from heckevoronoi.characters import make_dirichlet, make_hecke
from heckevoronoi.quadfield import classify_prime, make_field


def hecke(D, p, k, r, extension=0):
    ctx = make_field(D)
    return make_hecke(ctx, classify_prime(ctx, p), make_dirichlet(p, k), r, extension=extension)


@pytest.fixture(scope="session")
def psi_gauss():
    """Q(i), conductor above 13, chi(2) = e(2/12), weight 2."""
    return hecke(1, 13, 2, 2)


@pytest.fixture(scope="session")
def psi_d5():
    """Q(sqrt(-5)), class number 2, conductor above 3, weight 1."""
    return hecke(5, 3, 1, 1)


@pytest.fixture(scope="session")
def psi_d3():
    """Q(sqrt(-3)), half-integral ring, conductor above 7."""
    return hecke(3, 7, 1, 1)


ACCEPTANCE = {}


def record(criterion: int, ok: bool, detail: str):
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE[criterion] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
