"""Exception hierarchy for the package."""


class EllipticVNEError(Exception):
    """Base class for all errors raised by ellipt_vne."""


class DomainError(EllipticVNEError, ValueError):
    """An argument lies outside the domain of the operation."""


class DivergenceError(DomainError):
    """The requested quantity diverges (e.g. the quarter period at k = 1)."""


class DimensionMismatchError(EllipticVNEError, ValueError):
    pass


class NotHermitianError(EllipticVNEError, ValueError):
    pass


class LinearDependenceError(EllipticVNEError, ValueError):
    """Operators that must be linearly independent are not."""


class ClosureError(EllipticVNEError):
    """Commutation relations of the requested case do not hold.

    ``relation`` names the first relation that failed and ``residual`` its
    relative defect.
    """

    def __init__(self, message, relation=None, residual=None):
        super().__init__(message)
        self.relation = relation
        self.residual = residual


class DegenerateConstantsError(EllipticVNEError, ValueError):
    """Structure constants make the Hamiltonian undefined (division by zero)."""


class DerivationError(EllipticVNEError):
    """The coefficient system has no solution of the required form."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class GaugeError(EllipticVNEError):
    """The covariance condition needed to remove a linear part is violated."""

    def __init__(self, message, defect=None, time=None):
        super().__init__(message)
        self.defect = defect
        self.time = time


class IntegrationError(EllipticVNEError):
    """The ODE integrator gave up; carries the last accepted state."""

    def __init__(self, message, last_time=None, last_state=None):
        super().__init__(message)
        self.last_time = last_time
        self.last_state = last_state
