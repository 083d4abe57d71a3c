"""Shared fixtures: a reduced grid keeps dense operators at 512 x 512."""

import pytest

from mellinsio.config import RunConfig
from mellinsio.grid import GridSpec
from mellinsio.operators import interior_probes

# every identities check except the PV quadrature comparison, which needs
# a finer log grid than the reduced one to meet its tolerance
FAST_IDENTITIES = [
    "mellin_round_trip",
    "mellin_gaussian",
    "algebra_pointwise",
    "algebra_operator",
    "conv_identity",
    "conv_homomorphism",
    "pv_kernel_antisymmetry",
]


@pytest.fixture
def small_grid():
    return GridSpec(n_t=512, n_x=256)


@pytest.fixture
def probes(small_grid):
    return interior_probes(small_grid, seed=0)


@pytest.fixture
def small_config(small_grid):
    return RunConfig(grid=small_grid, suites={"identities": FAST_IDENTITIES})


@pytest.fixture
def binomials(small_grid):
    """Constant coefficients 0.3 and 0.2 on the shifts t -> 2t and t -> t e^{-1/2}."""
    from mellinsio.constructions import BinomialData
    from mellinsio.shifts import SOFunction, SOShift

    alpha = SOShift(SOFunction("constant", level=0.6931471805599453, name="ln2"), name="alpha")
    beta = SOShift(SOFunction("constant", level=-0.5, name="half"), name="beta")
    dc = BinomialData(SOFunction("constant", level=0.3, name="c"), alpha, small_grid)
    dd = BinomialData(SOFunction("constant", level=0.2, name="d"), beta, small_grid)
    return dc, dd


@pytest.fixture
def index_config(small_grid):
    """Index checks that need neither the mu scan nor dense regularizers."""
    return RunConfig(grid=small_grid, suites={"index": ["disk_sweep", "ellipticity", "negative_controls"]})
