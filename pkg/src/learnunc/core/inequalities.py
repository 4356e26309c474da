"""Covariance-bound family: the information inequality and the regret-based bound.

Both bound Cov^2(G, H) for G = Q_hat - Q.  With H the score the bound is
V(G) V(H); with H an error assessor (a statistic) it tightens to
V(H) (V(G) - R_opt).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..foundations import RandomStream, cov_estimate, simulate
from ..normal_lab import NormalModel
from ..report import MC_LEVEL, CheckReport
from .scenario import Scenario
from .theorems import _columns

FLOOR = 1e-12


@dataclass(frozen=True)
class ScorePair:
    """Sampler of (G, H) = (estimation error, score at the true parameter).

    ``q_prime`` is the derivative of the estimand, i.e. Cov(G, H) for an
    unbiased learner; ``equality`` declares G to be a multiple of H.
    """

    name: str
    simulate: Callable
    q_prime: float
    equality: bool = False


def normal_mean_score(model: NormalModel) -> ScorePair:
    n, mu, s2 = model.n, model.mu, model.sigma2

    def sim(block):
        g = math.sqrt(s2) * block.normal(n).mean(axis=1)  # Xbar - mu
        return g, n * g / s2

    return ScorePair(f"normal-mean-score(n={n},sigma2={s2!r})", sim, 1.0, equality=True)


def normal_variance_score(model: NormalModel) -> ScorePair:
    """S^2 against the sigma^2-score; S^2 is not affine in that score, so the bound is strict."""
    n, mu, s2 = model.n, model.mu, model.sigma2

    def sim(block):
        x = mu + math.sqrt(s2) * block.normal(n)
        score = -n / (2 * s2) + ((x - mu) ** 2).sum(axis=1) / (2 * s2**2)
        return x.var(axis=1, ddof=1) - s2, score

    return ScorePair(f"normal-variance-score(n={n},sigma2={s2!r})", sim, 1.0)


def constant_learner(model: NormalModel) -> ScorePair:
    """Q_hat = Q: zero error, so both sides vanish."""
    n, s2 = model.n, model.sigma2

    def sim(block):
        g = math.sqrt(s2) * block.normal(n).mean(axis=1)
        return np.zeros(len(block)), n * g / s2

    return ScorePair("constant-learner", sim, 0.0, equality=True)


def _centred(x):
    return x - x.mean()


def _gap_se(g, h, vg, vh, c, r_opt=None):
    """SE (influence function) of V(G) V(H) - C^2, or of V(G) - R_opt - C^2 / V(H)."""
    dg, dh = _centred(g), _centred(h)
    if r_opt is None:
        psi = vh * (dg * dg - vg) + vg * (dh * dh - vh) - 2 * c * (dg * dh - c)
    else:
        psi = (dg * dg - vg) - (2 * c / vh) * (dg * dh - c) + (c * c / vh**2) * (dh * dh - vh)
    return float(psi.std(ddof=1) / math.sqrt(g.size))


def cramer_rao_check(pair: ScorePair, reps: int = 200_000, stream: RandomStream | None = None,
                     workers: int = 1) -> list[CheckReport]:
    """Cov^2(G, H) <= V(G) V(H), Cov(G, H) = Q'(theta), and the product when equality is declared."""
    stream = stream if stream is not None else RandomStream(0)
    g, h = simulate(pair.simulate, reps, stream.derive(pair.name), workers).values()
    vg, vh = float(g.var(ddof=1)), float(h.var(ddof=1))
    cov = cov_estimate(g, h)
    c = cov.value
    prod = vg * vh
    se_gap = _gap_se(g, h, vg, vh, c)
    tol = MC_LEVEL * se_gap + FLOOR * max(1.0, prod)
    reports = [
        CheckReport.inequality(f"information-inequality/{pair.name}", c * c, prod, tol, "cramer-rao",
                               mc_se=se_gap, detail={"var_g": vg, "var_h": vh, "cov": c}),
        CheckReport.mc(f"score-covariance/{pair.name}", cov, pair.q_prime, "cramer-rao"),
    ]
    if pair.equality:
        dg, dh = _centred(g), _centred(h)
        psi = vh * (dg * dg - vg) + vg * (dh * dh - vh)
        se = float(psi.std(ddof=1) / math.sqrt(g.size))
        reports.append(CheckReport.mc(f"variance-product/{pair.name}", prod, pair.q_prime**2, "cramer-rao",
                                      se=se))
    return reports


def gh_tradeoff_report(scenario: Scenario, s=0, reps: int = 200_000, stream: RandomStream | None = None,
                       assessor: str | None = None, workers: int = 1) -> CheckReport:
    """Cov^2(G, H) <= V(G) - R_opt for the assessor rescaled to unit variance.

    The raw form Cov^2(G, H) <= V(H) (V(G) - R_opt) is carried in ``detail``.
    """
    stream = stream if stream is not None else RandomStream(0)
    state = scenario.state(s)
    a = assessor or scenario.primary
    scenario.check_assessor(a)
    cols = _columns(scenario, state, reps, stream, workers)
    g = cols["learner"] - cols["target"]
    h = cols[a]
    r_opt = float(scenario.optimal_risk(state))
    vg, vh = float(g.var(ddof=1)), float(h.var(ddof=1))
    name = f"regret-covariance-bound/{scenario.name}/{state.get('label')}/{a}"
    if vh == 0:
        dg2 = _centred(g) ** 2
        se = float(dg2.std(ddof=1) / math.sqrt(g.size))
        return CheckReport.inequality(name, 0.0, vg - r_opt, MC_LEVEL * se + FLOOR, "regret-covariance-bound",
                                      mc_se=se, detail={"degenerate_assessor": True})
    c = float(_centred(g) @ _centred(h) / (g.size - 1))
    lhs, rhs = c * c / vh, vg - r_opt
    se = _gap_se(g, h, vg, vh, c, r_opt)
    tol = MC_LEVEL * se + FLOOR
    return CheckReport.inequality(
        name, lhs, rhs, tol, "regret-covariance-bound", mc_se=se,
        detail={"raw_lhs": c * c, "raw_rhs": vh * (vg - r_opt), "var_g": vg, "var_h": vh,
                "optimal_risk": r_opt, "equality": abs(rhs - lhs) <= tol})
