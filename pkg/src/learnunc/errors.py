"""Exception hierarchy shared by every lab."""


class LearnUncError(Exception):
    """Base class for library errors."""


class UsageError(LearnUncError, ValueError):
    """Invalid arguments or configuration."""


class NumericalError(LearnUncError, ArithmeticError):
    """A computation produced non-finite or otherwise unusable numbers."""


class DegenerateDesignError(UsageError):
    """Regression design with sum(w * x**2) == 0."""


class ScenarioInvalidError(LearnUncError):
    """A scenario failed its own certificates (not a theorem violation)."""


class DomainTooNarrowError(NumericalError):
    """Grid does not contain the function's tails."""


class ResolutionError(NumericalError):
    """Grid too coarse for the requested accuracy."""


class ProbeDomainError(LearnUncError):
    """More than half of the probe evaluations failed."""
