"""Exception types raised across the package."""


class CtlqrError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(CtlqrError, ValueError):
    """Input has the wrong shape, is non-finite, or is otherwise malformed."""


class StabilityError(CtlqrError):
    """A matrix required to be Hurwitz is not."""


class StabilizabilityError(CtlqrError):
    """No stabilizing Riccati solution exists for the given pair (A, B)."""


class ConvergenceError(CtlqrError):
    """An iterative solver failed to reach its tolerance.

    Attributes
    ----------
    residual : float
        Best residual achieved before giving up.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class RankDeficiencyError(CtlqrError):
    """The empirical covariance is too ill-conditioned to invert without ridge.

    Attributes
    ----------
    lambda_min : float
        Smallest eigenvalue of the offending matrix.
    """

    def __init__(self, message, lambda_min=None):
        super().__init__(message)
        self.lambda_min = lambda_min


class BlowUpError(CtlqrError):
    """The simulated state norm exceeded the blow-up threshold.

    Attributes
    ----------
    time : float
        Simulation time at which the explosion was detected.
    state_norm : float
        Euclidean norm of the state at that time.
    """

    def __init__(self, message, time=None, state_norm=None):
        super().__init__(message)
        self.time = time
        self.state_norm = state_norm


class ScheduleError(CtlqrError, ValueError):
    """Invalid episode schedule parameters."""


class GridMismatchError(CtlqrError, ValueError):
    """Two trajectories do not share the same time grid."""


class ConfigError(CtlqrError, ValueError):
    """Invalid experiment configuration or unreadable system file."""
