import numpy as np
import pytest

from whub import build_edm, build_facial_basis, build_gangster, gen_random, wheel_fixture
from whub.instance import Instance


def problem(inst):
    """EDM, facial basis and gangster index for an instance."""
    return build_edm(inst), build_facial_basis(inst.sizes), build_gangster(inst.sizes)


@pytest.fixture(scope="session")
def wheel3():
    return wheel_fixture()


@pytest.fixture(scope="session")
def wheel3_problem(wheel3):
    return problem(wheel3)


@pytest.fixture
def pair_instance():
    # two singleton sets: the only feasible selection is (1, 1)
    return Instance.from_sets([[[0.0, 0.0]], [[3.0, 4.0]]])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_random():
    return [gen_random(3, 2, 2, False, s) for s in range(3)]


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
