"""Exception types shared across the toolkit."""


class ErgmaxError(Exception):
    """Base class for all toolkit errors."""


class NonExpanding(ErgmaxError):
    """Map parameters do not define a uniformly expanding map."""


class PeriodTooLarge(ErgmaxError):
    """Requested period exceeds the enumeration cap."""


class ParseError(ErgmaxError):
    """Observable expression could not be parsed.

    Carries the offending position and a description of what was expected.
    """

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class DomainError(ErgmaxError):
    """Evaluation hit a singularity (division by zero, overflow)."""


class NotSmooth(ErgmaxError):
    """Derivative bounds unavailable for this expression.

    Raised when a derivative report is requested for an expression
    containing abs.  The Lipschitz bound is still valid and is carried
    on the exception.
    """

    def __init__(self, message: str, lip_bound: float):
        super().__init__(message)
        self.lip_bound = lip_bound


class NoConvergence(ErgmaxError):
    """Fixed-point iteration did not reach tolerance."""


class DeltaTooLarge(ErgmaxError):
    """Pseudo-orbit defect too large for the shadowing constants."""


class UnsupportedMap(ErgmaxError):
    """Operation is only implemented for a restricted map family."""


class TargetUnreachable(ErgmaxError):
    """Smoothing could not meet the requested error target."""


class PerturbationTooLarge(ErgmaxError):
    """Auxiliary perturbation violates its size or slope budget."""


class InsufficientSamples(ErgmaxError):
    """Too few samples to populate the partition at the requested depth."""
