"""The check record every verifier emits, plus its serialisation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

KINDS = ("identity", "inequality", "mc-consistency")
MC_LEVEL = 3.5


@dataclass
class CheckReport:
    """One identity/inequality/MC-consistency check.

    ``margin`` is oriented so that the check passes exactly when
    ``margin >= -tolerance``: for inequalities it is the signed distance to
    the bound in the direction of ``relation``, for identities and MC
    comparisons it is ``-|lhs - rhs|``.
    """

    name: str
    kind: str
    lhs: float | complex
    rhs: float | complex
    margin: float
    tolerance: float
    provenance: str
    relation: str = "=="
    mc_se: float | None = None
    detail: dict[str, Any] = field(default_factory=dict)
    passed: bool = field(init=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown check kind {self.kind!r}")
        if not self.provenance:
            raise ValueError("provenance must be nonempty")
        self.margin = float(self.margin)
        self.tolerance = float(self.tolerance)
        self.passed = bool(self.margin >= -self.tolerance)

    @classmethod
    def identity(cls, name, lhs, rhs, tolerance, provenance, **kw) -> CheckReport:
        return cls(name, "identity", lhs, rhs, -abs(lhs - rhs), tolerance, provenance,
                   relation="==", **kw)

    @classmethod
    def inequality(cls, name, lhs, rhs, tolerance, provenance, relation="<=", **kw) -> CheckReport:
        if relation == "<=":
            margin = rhs - lhs
        elif relation == ">=":
            margin = lhs - rhs
        else:
            raise ValueError(f"relation must be '<=' or '>=', got {relation!r}")
        return cls(name, "inequality", lhs, rhs, margin, tolerance, provenance,
                   relation=relation, **kw)

    @classmethod
    def mc(cls, name, estimate, target, provenance, level=MC_LEVEL, se=None, **kw) -> CheckReport:
        """MC estimate (an ``McEstimate`` or float with ``se``) vs a closed form."""
        value = getattr(estimate, "value", estimate)
        se = getattr(estimate, "std_error", se)
        return cls(name, "mc-consistency", value, target, -abs(value - target), level * se,
                   provenance, relation="==", mc_se=se, **kw)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "kind": self.kind,
            "relation": self.relation,
            "lhs": encode_number(self.lhs),
            "rhs": encode_number(self.rhs),
            "margin": encode_number(self.margin),
            "tolerance": encode_number(self.tolerance),
            "mc_se": encode_number(self.mc_se),
            "pass": self.passed,
            "provenance": self.provenance,
            "detail": encode_value(self.detail),
        }


def encode_number(x):
    if x is None:
        return None
    if isinstance(x, bool):
        return x
    if isinstance(x, complex) or (hasattr(x, "imag") and getattr(x, "imag", 0) != 0):
        z = complex(x)
        return {"re": encode_number(z.real), "im": encode_number(z.imag)}
    if isinstance(x, int) and not isinstance(x, bool):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def encode_value(v):
    """Recursively turn numpy scalars/arrays, tuples and complex numbers into JSON-able data."""
    if isinstance(v, dict):
        return {str(k): encode_value(val) for k, val in v.items()}
    if isinstance(v, (list, tuple)):
        return [encode_value(x) for x in v]
    if hasattr(v, "tolist") and not isinstance(v, (str, bytes)):
        return encode_value(v.tolist())
    if isinstance(v, (str, bool)) or v is None:
        return v
    if hasattr(v, "to_dict"):
        return encode_value(v.to_dict())
    return encode_number(v)
