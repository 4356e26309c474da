"""Variance decomposition and Hoeffding's covariance identity on finite joints."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import UsageError
from ..report import CheckReport


@dataclass(frozen=True, eq=False)
class FiniteJoint:
    """Joint pmf of (G, H); ``probs[i, j] = P(G = support_g[i], H = support_h[j])``."""

    support_g: np.ndarray
    support_h: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.support_g, dtype=float)
        h = np.asarray(self.support_h, dtype=float)
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (g.size, h.size):
            raise UsageError(f"probs shape {p.shape} does not match supports ({g.size}, {h.size})")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise UsageError("probabilities must be nonnegative and sum to 1")
        if np.unique(g).size != g.size or np.unique(h).size != h.size:
            raise UsageError("support points must be distinct")
        # keep supports sorted; the CDF sums below rely on it
        ig, ih = np.argsort(g), np.argsort(h)
        object.__setattr__(self, "support_g", g[ig])
        object.__setattr__(self, "support_h", h[ih])
        object.__setattr__(self, "probs", p[np.ix_(ig, ih)])

    @classmethod
    def random(cls, rng: np.random.Generator, max_size: int = 6) -> FiniteJoint:
        a, b = rng.integers(1, max_size + 1, size=2)
        g = np.sort(rng.choice(np.arange(-20, 21), size=a, replace=False) * 0.5)
        h = np.sort(rng.normal(size=b) * 3)
        p = rng.random((a, b)) ** 2
        p[rng.random((a, b)) < 0.2] = 0.0
        if p.sum() == 0:
            p[0, 0] = 1.0
        return cls(g, h, p / p.sum())

    @property
    def p_g(self):
        return self.probs.sum(axis=1)

    @property
    def p_h(self):
        return self.probs.sum(axis=0)


def eve_law_check(joint: FiniteJoint, tol: float = 1e-12) -> CheckReport:
    """V(H) against E[V(H|G)] + V[E(H|G)]."""
    h, pg, ph, p = joint.support_h, joint.p_g, joint.p_h, joint.probs
    mean_h = ph @ h
    var_h = ph @ (h - mean_h) ** 2
    keep = pg > 0
    cond = p[keep] / pg[keep, None]
    cond_mean = cond @ h
    cond_var = np.einsum("ij,ij->i", cond, (h[None, :] - cond_mean[:, None]) ** 2)
    e_var = pg[keep] @ cond_var
    var_e = pg[keep] @ (cond_mean - mean_h) ** 2
    return CheckReport.identity(
        "eve-law", var_h, e_var + var_e, tol, "eve-law",
        detail={"expected_conditional_variance": e_var, "variance_of_conditional_mean": var_e},
    )


def _cov_direct(joint: FiniteJoint) -> float:
    g, h, p = joint.support_g, joint.support_h, joint.probs
    mg, mh = joint.p_g @ g, joint.p_h @ h
    return float((g - mg) @ p @ (h - mh))


def hoeffding_cov(joint: FiniteJoint, tol: float = 1e-10) -> CheckReport:
    """Covariance by direct moments against the CDF double integral.

    The CDFs are step functions, so the double integral is a finite sum over
    the rectangles between consecutive support points.
    """
    g, h, p = joint.support_g, joint.support_h, joint.probs
    F = p.cumsum(axis=0).cumsum(axis=1)
    Fg, Fh = F[:, -1], F[-1, :]
    dg, dh = np.diff(g), np.diff(h)
    integrand = F[:-1, :-1] - np.outer(Fg[:-1], Fh[:-1])
    rhs = float(dg @ integrand @ dh) if dg.size and dh.size else 0.0
    return CheckReport.identity("hoeffding-covariance", _cov_direct(joint), rhs, tol,
                                "hoeffding-identity")
