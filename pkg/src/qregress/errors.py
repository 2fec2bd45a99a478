"""Exception hierarchy shared by all modules."""


class QRegressError(Exception):
    """Base class for all package errors."""


class NotHermitianError(QRegressError, ValueError):
    """An operator that must be Hermitian is not (within tolerance)."""


class QuadratureError(QRegressError, RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance.

    Attributes
    ----------
    value : complex
        Best estimate at the time of failure.
    error : float
        Achieved error estimate.
    """

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class InstabilityError(QRegressError, RuntimeError):
    """A time stepper left its stability region."""


class SingularRateError(QRegressError, ArithmeticError):
    """Time-local rates are undefined because an amplitude crossed zero.

    Attributes
    ----------
    t : float
        First time at which the amplitude fell below the floor.
    """

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class MapSingularityError(QRegressError, ArithmeticError):
    """A dynamical map is not invertible at the requested time.

    Attributes
    ----------
    t : float
        Offending time.
    """

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class SectorLeakageError(QRegressError, RuntimeError):
    """Population left the truncated excitation sector."""


class StepSizeError(QRegressError, RuntimeError):
    """An adaptive ODE integrator failed (step size underflow)."""
