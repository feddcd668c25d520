import numpy as np
import pytest

from zigzag.anynode import build_anynode
from zigzag.field import field_new
from zigzag.rowspace import RVec
from zigzag.zigzag import build_optimal, build_searched


@pytest.fixture(scope="session")
def gf3():
    return field_new(3)


@pytest.fixture(scope="session")
def gf4():
    return field_new(4)


@pytest.fixture(scope="session")
def code22():
    """Two-parity example code: r=2, m=2, k=3 over GF(3)."""
    return build_optimal(2, 2)


@pytest.fixture(scope="session")
def code32():
    """Three-parity example code: r=3, m=2, k=3 over GF(4)."""
    return build_optimal(3, 2)


@pytest.fixture(scope="session")
def anynode23():
    """Any-node example code: r=2, m=3, k=2 over GF(3), alpha=2."""
    return build_anynode(2, 3)


def square_sum_vectors():
    """T = {0, e_1, e_2, e_1+e_2} over Z_3^2."""
    return [RVec(3, 2, d) for d in [(0, 0), (1, 0), (0, 1), (1, 1)]]


def weight_two_vectors():
    """Four weight-2 vectors of Z_2^4 used by the partial-rebuild example."""
    return [RVec(2, 4, d) for d in [(0, 1, 0, 1), (0, 1, 1, 0), (1, 0, 0, 1), (1, 0, 1, 0)]]


@pytest.fixture(scope="session")
def square_sum_code():
    return build_searched(3, 2, square_sum_vectors(), field_new(16), seed=0)


@pytest.fixture(scope="session")
def weight_two_code():
    return build_searched(2, 4, weight_two_vectors(), field_new(8), seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def erase(columns, nodes):
    return [None if i in nodes else c for i, c in enumerate(columns)]


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for _, _, _, line in sorted(mod.RESULTS):
        terminalreporter.write_line(line)
