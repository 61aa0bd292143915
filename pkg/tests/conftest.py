import numpy as np
import pytest

from ttdcopula.marginals import GmmParams
from ttdcopula.presets import leopoldstrasse_marginals, leopoldstrasse_spec
from ttdcopula.tripdata import synthesize

# reference segment-2 mixture, weights rounded (they sum to 0.99)
SEG2_MEANS = (5.41, 8.86, 16.31)
SEG2_SIGMAS = (1.44, 2.68, 5.58)
SEG2_WEIGHTS = (0.52, 0.38, 0.09)


@pytest.fixture(scope="session")
def seg2():
    return GmmParams.normalized(SEG2_MEANS, SEG2_SIGMAS, SEG2_WEIGHTS)


@pytest.fixture(scope="session")
def seg3():
    return leopoldstrasse_marginals()[2]


@pytest.fixture(scope="session")
def std_normal():
    return GmmParams((0.0,), (1.0,), (1.0,))


@pytest.fixture(scope="session")
def leopold_series():
    return synthesize(leopoldstrasse_spec(seed=42))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS):
            terminalreporter.write_line(line)
