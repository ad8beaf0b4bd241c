import pytest

from pbdss.gf import FieldSpec
from pbdss.repair import CodeSpec


@pytest.fixture(scope="session")
def gf8():
    return FieldSpec(2, 3)


@pytest.fixture(scope="session")
def gf9():
    return FieldSpec(3, 2)


@pytest.fixture(scope="session")
def gf11():
    return FieldSpec(11)


@pytest.fixture(scope="session")
def spec_10_5():
    """The (10,5) running example: n_a=7, tau=1, three sum-parity nodes."""
    return CodeSpec.build(5, 7, 8, 1)


@pytest.fixture(scope="session")
def spec_9_5():
    """Benchmark row (9,5,3): n_a=8, tau=1, one sum-parity node."""
    return CodeSpec.build(5, 8, 6, 1)


@pytest.fixture(scope="session")
def spec_7_4_h():
    """The (7,4) heuristic example: n_a=6, tau=1, one heuristic node."""
    return CodeSpec.build(4, 6, 5, 1, construction=2)
