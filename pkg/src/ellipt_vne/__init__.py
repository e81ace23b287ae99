"""Elliptic-function solutions of nonlinear von Neumann equations."""

from .elliptic import complete_elliptic_K, jacobi_sncndn, period
from .errors import (
    ClosureError,
    DegenerateConstantsError,
    DerivationError,
    DimensionMismatchError,
    DivergenceError,
    DomainError,
    EllipticVNEError,
    GaugeError,
    IntegrationError,
    LinearDependenceError,
    NotHermitianError,
)
from .operators import OperatorMap, operator_map_from_action
from .special_solutions import (
    Case1System,
    Case2System,
    fit_case1_constants,
    fit_case2_constants,
    theorem_residual,
)

from .scenarios import SCENARIOS, build_scenario

__version__ = "0.1.0"

__all__ = [
    "SCENARIOS",
    "Case1System",
    "Case2System",
    "ClosureError",
    "DegenerateConstantsError",
    "DerivationError",
    "DimensionMismatchError",
    "DivergenceError",
    "DomainError",
    "EllipticVNEError",
    "GaugeError",
    "IntegrationError",
    "LinearDependenceError",
    "NotHermitianError",
    "OperatorMap",
    "build_scenario",
    "complete_elliptic_K",
    "fit_case1_constants",
    "fit_case2_constants",
    "jacobi_sncndn",
    "operator_map_from_action",
    "period",
    "theorem_residual",
]
