"""Exception and warning types shared across the package."""


class SimulationError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SimulationError, ValueError):
    """An input lies outside the physically meaningful domain."""


class SingularityError(DomainError):
    """A steady-state response denominator sits too close to an exact pole.

    With finite dissipation the denominators never vanish, so a near-pole
    value indicates a configuration mistake rather than a genuinely large
    amplitude.  ``tone`` names the drive tone ("plus" or "minus") whose
    response hit the pole.
    """

    def __init__(self, message: str, tone: str | None = None):
        super().__init__(message)
        self.tone = tone


class StabilityError(SimulationError):
    """The drift matrix is not strictly stable, so no steady state exists.

    Carries the :class:`~qwsqueeze.dynamics.StabilityVerdict` that triggered
    the refusal, when available.
    """

    def __init__(self, message: str, verdict=None):
        super().__init__(message)
        self.verdict = verdict


class ConditioningError(SimulationError):
    """A linear solve produced a result that failed its residual contract."""


class ConvergenceError(SimulationError):
    """An iterative computation stopped before reaching its tolerance.

    ``residual`` holds the final residual norm and ``result`` the last
    iterate, so callers can inspect how far the iteration got.
    """

    def __init__(self, message: str, residual: float | None = None, result=None):
        super().__init__(message)
        self.residual = residual
        self.result = result


class ConfigError(SimulationError):
    """A run configuration is malformed or internally inconsistent."""


class ConditioningWarning(UserWarning):
    """A solve succeeded but showed signs of ill-conditioning."""
