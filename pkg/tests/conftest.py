import pytest

from ptwell.oracle_verifier import ShootingConfig, mismatch
from ptwell.susy_hierarchy import square_well_potential


@pytest.fixture(scope="session", autouse=True)
def _warm_integrator():
    # the first mismatch call compiles the RK4 kernel; keep that out of timed tests
    V = square_well_potential(1.0)
    mismatch(V, 3.0 + 0j, ShootingConfig.for_potential(V))
