import numpy as np
import pytest

from diracflux.momentum import cartesian_grid, gaussian_packet


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in sorted(RESULTS):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {criterion}: {detail}")


@pytest.fixture(scope="session")
def default_packet():
    """The standard test state: k0 = (2,0,0), sigma = 0.5, m = 1, 48^3 box."""
    grid = cartesian_grid((2.0, 0.0, 0.0), 3.0, 48)
    return gaussian_packet(grid, (2.0, 0.0, 0.0), 0.5, 1.0)


@pytest.fixture(scope="session")
def wide_packet():
    """Same packet on a 9-sigma box; lattice truncation below 1e-12."""
    grid = cartesian_grid((2.0, 0.0, 0.0), 4.5, 64)
    return gaussian_packet(grid, (2.0, 0.0, 0.0), 0.5, 1.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260810)
