import numpy as np
import pytest

from spdcdesign.core import grid_for_wavelength_span
from spdcdesign.dispersion import bdl_phase_group_ratio, build_dispersion, calibrate_period


@pytest.fixture(scope="session")
def disp():
    return build_dispersion()


@pytest.fixture(scope="session")
def period(disp):
    return calibrate_period(disp)


@pytest.fixture(scope="session")
def ratio(disp):
    return bdl_phase_group_ratio(disp)


@pytest.fixture(scope="session")
def grid4k():
    return grid_for_wavelength_span(4097, 175.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
