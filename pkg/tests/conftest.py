import numpy as np
import pytest

from pwlab import decomposition as dc
from pwlab import geometry as geo
from pwlab import partition as pt
from pwlab import weight as wt

ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES[number] = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])


@pytest.fixture(scope="session")
def unit_disc():
    return geo.disc()


@pytest.fixture(scope="session")
def unit_square():
    return geo.box([1.0, 1.0])


@pytest.fixture(scope="session")
def triangle():
    return geo.polygon([[0.0, 0.0], [2.0, 0.0], [0.5, 1.5]])


@pytest.fixture(scope="session")
def disc_weight(unit_disc):
    return wt.normalize(unit_disc)


@pytest.fixture(scope="session")
def square_weight(unit_square):
    return wt.normalize(unit_square)


@pytest.fixture(scope="session")
def disc_dec3(unit_disc):
    return dc.decompose_smooth2d(unit_disc, m=3, epsilon=0.05, j_max=3)


@pytest.fixture(scope="session")
def square_dec4(unit_square):
    return dc.decompose_box(2, 4, unit_square)


@pytest.fixture(scope="session")
def disc_pou3(disc_dec3):
    return pt.build_partition(disc_dec3, grid=96)


@pytest.fixture(scope="session")
def square_pou4(square_dec4):
    return pt.build_partition(square_dec4, grid=96)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
