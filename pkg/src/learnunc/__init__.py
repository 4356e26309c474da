"""Numerical checks of learning-uncertainty bounds, from regression to conjugate quantum variables."""
__version__ = "0.1.0"

from .errors import (
    DegenerateDesignError,
    DomainTooNarrowError,
    LearnUncError,
    NumericalError,
    ProbeDomainError,
    ResolutionError,
    ScenarioInvalidError,
    UsageError,
)
from .foundations import RandomStream
from .report import CheckReport

__all__ = [
    "__version__", "CheckReport", "RandomStream",
    "DegenerateDesignError", "DomainTooNarrowError", "LearnUncError", "NumericalError", "ProbeDomainError",
    "ResolutionError", "ScenarioInvalidError", "UsageError",
]
