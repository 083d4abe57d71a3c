"""
mellinsio: numerical Mellin operator calculus on the half-line.

Discretizes weighted Mellin convolutions, slowly oscillating shifts and
Mellin pseudodifferential operators on a log grid, builds the binomial
symbols and their Neumann-series inverses, and verifies Fredholm and
index-zero properties through the ``mellin-sio`` command line.
"""

__version__ = "0.1.0"

from .config import RunConfig, load_config
from .errors import (
    ConfigurationError,
    DegenerateLoopError,
    DomainError,
    EllipticityError,
    InvalidInputError,
    MellinSIOError,
    NumericalError,
    PreconditionError,
    ScanError,
)
from .grid import GridFunction, GridSpec, mellin_forward, mellin_inverse
from .operators import DenseOperator, compactness_proxy, conv_operator, pdo_operator
from .suites import SUITE_REGISTRY, run_suite
from .symbols import make_p_y, make_r_y, make_s_y

__all__ = [
    "RunConfig",
    "load_config",
    "ConfigurationError",
    "DegenerateLoopError",
    "DomainError",
    "EllipticityError",
    "InvalidInputError",
    "MellinSIOError",
    "NumericalError",
    "PreconditionError",
    "ScanError",
    "GridFunction",
    "GridSpec",
    "mellin_forward",
    "mellin_inverse",
    "DenseOperator",
    "compactness_proxy",
    "conv_operator",
    "pdo_operator",
    "SUITE_REGISTRY",
    "run_suite",
    "make_p_y",
    "make_r_y",
    "make_s_y",
]
