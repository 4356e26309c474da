"""Jacobian-symmetry test for candidate score fields.

A score S = grad log L has a symmetric Jacobian.  A field whose Jacobian
is measurably asymmetric therefore cannot be the score of any model; a
symmetric one is only "not refuted".
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import qmc

from .errors import ProbeDomainError, UsageError
from .foundations import RandomStream
from .report import CheckReport

SYMMETRIC, ASYMMETRIC = "symmetric", "asymmetric"


@dataclass(frozen=True)
class ScoreField:
    name: str
    dim: int
    eval: Callable[[np.ndarray], np.ndarray]
    domain_box: tuple  # ((lo, hi), ...) per coordinate
    declared: str | None = None  # SYMMETRIC / ASYMMETRIC when known
    kind: str = ""

    def __post_init__(self):
        if self.dim < 2:
            raise UsageError("a score field needs dim >= 2")
        box = tuple((float(lo), float(hi)) for lo, hi in self.domain_box)
        if len(box) != self.dim or any(not lo < hi for lo, hi in box):
            raise UsageError("domain_box needs one nondegenerate (lo, hi) pair per coordinate")
        object.__setattr__(self, "domain_box", box)

    def permuted(self, perm) -> ScoreField:
        """Same field with coordinates relabelled: T(phi)_i = S(P^-1 phi)_{perm[i]}."""
        perm = np.asarray(perm)
        inv = np.argsort(perm)

        def ev(phi):
            return np.asarray(self.eval(np.asarray(phi)[inv]))[perm]

        box = tuple(self.domain_box[k] for k in perm)
        return ScoreField(f"{self.name}[perm]", self.dim, ev, box, self.declared, self.kind)


@dataclass
class SymmetryReport:
    field: str
    max_asymmetry: float
    probe_points: int
    classification: str
    tol: float
    fd_step: float
    failed_probes: int = 0
    worst: dict = field(default_factory=dict)
    declared: str | None = None
    kind: str = ""

    @property
    def verdict(self) -> str:
        return "not an authentic score" if self.classification == ASYMMETRIC else "not refuted"

    @property
    def matches(self) -> bool | None:
        return None if self.declared is None else self.declared == self.classification

    def check(self) -> CheckReport:
        """Symmetric fields: max_asymmetry <= tol.  Asymmetric ones: max_asymmetry >= 10 tol."""
        detail = {"classification": self.classification, "verdict": self.verdict, "kind": self.kind,
                  "probe_points": self.probe_points, "failed_probes": self.failed_probes,
                  "fd_step": self.fd_step, "worst": self.worst}
        name = f"score-symmetry/{self.field}"
        if (self.declared or self.classification) == ASYMMETRIC:
            return CheckReport.inequality(name, self.max_asymmetry, 10 * self.tol, 0.0, "score-symmetry",
                                          relation=">=", detail=detail)
        return CheckReport.inequality(name, self.max_asymmetry, self.tol, 0.0, "score-symmetry", detail=detail)


def tolerance(fd_step: float) -> float:
    return max(1e-5, 100 * fd_step**2)


def probe_points(box, n_probes: int, stream: RandomStream | None = None) -> np.ndarray:
    """Halton points in the box, Cranley-Patterson rotated by a draw from ``stream`` if given."""
    d = len(box)
    u = qmc.Halton(d, scramble=False).random(n_probes + 1)[1:]
    if stream is not None:
        u = (u + stream.uniform(d)) % 1.0
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    return lo + u * (hi - lo)


def jacobian(f: ScoreField, theta, fd_step: float) -> np.ndarray:
    """J[i, j] = dS_i / dtheta_j by central differences."""
    theta = np.asarray(theta, dtype=float)
    jac = np.empty((f.dim, f.dim))
    for j in range(f.dim):
        e = np.zeros(f.dim)
        e[j] = fd_step
        jac[:, j] = (np.asarray(f.eval(theta + e), float) - np.asarray(f.eval(theta - e), float)) / (2 * fd_step)
    if not np.all(np.isfinite(jac)):
        raise FloatingPointError("non-finite score value")
    return jac


def symmetry_check(f: ScoreField, n_probes: int = 64, fd_step: float = 1e-4,
                   stream: RandomStream | None = None) -> SymmetryReport:
    if not fd_step > 0:
        raise UsageError("fd_step must be positive")
    if n_probes < 1:
        raise UsageError("need at least one probe")
    pts = probe_points(f.domain_box, n_probes, stream)
    worst = {"value": 0.0}
    failed = 0
    best = 0.0
    for theta in pts:
        try:
            with np.errstate(all="raise", under="ignore"):
                jac = jacobian(f, theta, fd_step)
        except (ArithmeticError, ValueError):
            failed += 1
            continue
        asym = np.abs(jac - jac.T)
        i, j = np.unravel_index(np.argmax(asym), asym.shape)
        if asym[i, j] > best or not worst.get("theta"):
            best = float(asym[i, j])
            worst = {"value": best, "theta": theta.tolist(), "pair": [int(min(i, j)), int(max(i, j))]}
    if failed > n_probes / 2:
        raise ProbeDomainError(f"{f.name}: {failed} of {n_probes} probes failed to evaluate")
    tol = tolerance(fd_step)
    cls = SYMMETRIC if best <= tol else ASYMMETRIC
    return SymmetryReport(f.name, best, n_probes - failed, cls, tol, fd_step, failed, worst, f.declared, f.kind)


# ---------------------------------------------------------------- built-in fields


def _fixed_sample(n: int = 10, seed: int = 7) -> np.ndarray:
    return 0.5 + 1.3 * RandomStream(seed).normal(n)


def normal_score(data=None) -> ScoreField:
    """Score of N(mu, sigma^2) in (mu, sigma^2) at fixed data."""
    x = _fixed_sample() if data is None else np.asarray(data, float)
    n = x.size

    def ev(t):
        mu, v = t
        r = x - mu
        return np.array([r.sum() / v, -n / (2 * v) + (r * r).sum() / (2 * v * v)])

    return ScoreField("normal-score", 2, ev, ((-2.0, 2.0), (0.5, 3.0)), SYMMETRIC, "type I: genuine score")


def misspecified_normal_score(data=None) -> ScoreField:
    """Score of the working model N(mu, sigma^2 (1 + mu^2)) applied to data it did not generate."""
    x = np.abs(_fixed_sample(12, 11)) ** 1.5 if data is None else np.asarray(data, float)
    n = x.size

    def ev(t):
        mu, s2 = t
        g = 1 + mu * mu
        r = x - mu
        ss = (r * r).sum()
        d_mu = -n * mu / g + r.sum() / (s2 * g) + ss * mu / (s2 * g * g)
        d_s2 = -n / (2 * s2) + ss / (2 * s2 * s2 * g)
        return np.array([d_mu, d_s2])

    return ScoreField("misspecified-normal-score", 2, ev, ((-2.0, 2.0), (0.5, 3.0)), SYMMETRIC,
                      "type II: authentic score of the wrong model")


def coupled_variance_quasi_score(y=(1.3, -0.4)) -> ScoreField:
    """U_i = (y_i - theta_i) / (1 + theta_k^2), k != i: each cell's variance depends on the other parameter.

    Stand-in for the 2x2-table quasi-score: the variance coupling is not
    differentiated, so dU_1/dtheta_2 and dU_2/dtheta_1 differ.
    """
    y1, y2 = map(float, y)

    def ev(t):
        a, b = t
        return np.array([(y1 - a) / (1 + b * b), (y2 - b) / (1 + a * a)])

    return ScoreField("coupled-variance-quasi-score", 2, ev, ((-2.0, 2.0), (-2.0, 2.0)), ASYMMETRIC,
                      "type III: quasi-score of no model")


def rotation_field() -> ScoreField:
    return ScoreField("rotation", 2, lambda t: np.array([t[1], -t[0]]), ((-1.0, 1.0), (-1.0, 1.0)), ASYMMETRIC,
                      "constant antisymmetric Jacobian")


def gradient_field(potential_grad: Callable, dim: int, box=None, name: str = "gradient") -> ScoreField:
    box = box if box is not None else tuple((-2.0, 2.0) for _ in range(dim))
    return ScoreField(name, dim, potential_grad, box, SYMMETRIC, "gradient of a potential")


def example_gradient() -> ScoreField:
    """grad of V = theta_1^2 theta_2 + sin(theta_2)."""
    return gradient_field(lambda t: np.array([2 * t[0] * t[1], t[0] ** 2 + math.cos(t[1])]), 2,
                          name="gradient-example")


BATTERY = {
    "normal-score": normal_score,
    "misspecified-normal-score": misspecified_normal_score,
    "coupled-variance-quasi-score": coupled_variance_quasi_score,
}


def classify_battery(n_probes: int = 64, fd_step: float = 1e-4, stream: RandomStream | None = None,
                     names=None) -> list[SymmetryReport]:
    names = list(BATTERY) if names is None else list(names)
    unknown = [n for n in names if n not in BATTERY]
    if unknown:
        raise UsageError(f"unknown score fields {unknown}; choose from {sorted(BATTERY)}")
    stream = stream if stream is not None else RandomStream(0)
    return [symmetry_check(BATTERY[n](), n_probes, fd_step, stream.derive(n)) for n in names]
