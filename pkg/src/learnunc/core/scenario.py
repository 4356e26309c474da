"""Scenario records: a family of distributions, a learner, and candidate error assessors."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import UsageError

OPTIMUM_KINDS = ("closed-form", "family-minimum")


@dataclass(frozen=True)
class Scenario:
    """Learner/assessor pair evaluated at a finite list of states.

    ``simulate(state, block)`` returns a dict with arrays ``"learner"``,
    ``"target"`` and one array per assessor name.  The assessors must be
    unbiased for zero over the whole parametric family the states are drawn
    from; the certificates only check that at the listed states.

    ``optimal_risk(state)`` is the smallest risk over the learner class;
    ``optimum`` records whether it is exact (``"closed-form"``) or only the
    minimum over a declared sub-family (``"family-minimum"``, an upper bound
    on the true optimum).  ``optimal`` declares the learner itself optimal.
    """

    name: str
    states: tuple
    simulate: Callable[[dict, object], dict]
    assessors: tuple
    optimal_risk: Callable[[dict], float]
    optimum: str = "closed-form"
    optimal: bool = False
    description: str = ""

    def __post_init__(self):
        if self.optimum not in OPTIMUM_KINDS:
            raise UsageError(f"optimum must be one of {OPTIMUM_KINDS}")
        if not self.states:
            raise UsageError(f"scenario {self.name!r} has no states")
        if not self.assessors:
            raise UsageError(f"scenario {self.name!r} has no assessors")
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "assessors", tuple(self.assessors))

    @property
    def primary(self) -> str:
        return self.assessors[0]

    def state(self, s) -> dict:
        """Look a state up by index or label."""
        if isinstance(s, dict):
            return s
        if isinstance(s, (int, np.integer)):
            return self.states[int(s)]
        for st in self.states:
            if st.get("label") == s:
                return st
        raise UsageError(f"scenario {self.name!r} has no state {s!r}")

    def check_assessor(self, name):
        if name not in self.assessors:
            raise UsageError(f"scenario {self.name!r} has no assessor {name!r}; "
                             f"choose from {list(self.assessors)}")


@dataclass(frozen=True)
class AsymptoticScenario:
    """A scenario template indexed by an information index (here: sample size).

    ``build(iota)`` returns the :class:`Scenario` at that index and
    ``error_rate(iota)`` the vanishing rate the biases must follow.
    """

    name: str
    build: Callable[[int], Scenario]
    iota_list: tuple
    error_rate: Callable[[int], float]
    description: str = ""
    assessors: tuple = field(default=())

    def __post_init__(self):
        iotas = tuple(int(i) for i in self.iota_list)
        if len(iotas) < 2 or any(b <= a for a, b in zip(iotas, iotas[1:])):
            raise UsageError("iota_list needs at least two increasing values")
        object.__setattr__(self, "iota_list", iotas)
        if not self.assessors:
            object.__setattr__(self, "assessors", self.build(iotas[0]).assessors)
