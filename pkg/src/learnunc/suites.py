"""Named check suites run by the command-line front end.

A suite is a list of tasks; each task returns CheckReports and any exception
it raises becomes a failing record instead of aborting the run.  Every task
draws from its own derived stream, so results do not depend on the order or
concurrency in which tasks execute.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .foundations import FiniteJoint, RandomStream, eve_law_check, hoeffding_cov
from .report import CheckReport


@dataclass(frozen=True)
class SuiteSettings:
    reps: int = 200_000
    grid_points: int = 2048
    grid_span: float | None = None
    hbar: float = 1.0
    workers: int = 1


Task = Callable[[SuiteSettings, RandomStream], "list[CheckReport]"]


def failure_record(name: str, exc: BaseException) -> CheckReport:
    return CheckReport(name, "identity", math.nan, 0.0, -math.inf, 0.0, "plumbing",
                       detail={"error": type(exc).__name__, "message": str(exc)})


# ---------------------------------------------------------------- foundations

N_JOINTS = 100


def _worst(name, reports, tol, provenance):
    diffs = [abs(r.lhs - r.rhs) for r in reports]
    k = int(np.argmax(diffs))
    return CheckReport.identity(name, float(diffs[k]), 0.0, tol, provenance,
                                detail={"joints": len(reports), "worst_index": k,
                                        "worst_lhs": reports[k].lhs, "worst_rhs": reports[k].rhs})


def _identities(cfg, stream):
    rng = np.random.default_rng(int(stream.uniform(1)[0] * 2**53))
    joints = [FiniteJoint.random(rng) for _ in range(N_JOINTS)]
    return [_worst("eve-law-max-deviation", [eve_law_check(j) for j in joints], 1e-10, "eve-law"),
            _worst("hoeffding-max-deviation", [hoeffding_cov(j) for j in joints], 1e-10,
                   "hoeffding-identity")]


def _substreams(cfg, stream):
    # replication i must see the same draws whether generated alone or in a block
    block = stream.replications(0, 64).normal(3)
    single = np.vstack([stream.replications(i, i + 1).normal(3) for i in range(64)])
    diff = float(np.max(np.abs(block - single)))
    return [CheckReport.identity("substream-block-invariance", diff, 0.0, 0.0, "plumbing")]


# ---------------------------------------------------------------- wls

def _canonical():
    from .wls import HeteroDesign, PredictionTarget, WeightVector
    return HeteroDesign([1.0, 1.0], [1.0, 4.0]), WeightVector.ols(2), PredictionTarget(1.0, 1.0)


def _wls_closed(cfg, stream):
    from .wls import HeteroDesign, WeightVector, closed_form, corr_n2, identity_rr_equals_rho2, prediction_gamma
    design, ols, target = _canonical()
    out = [identity_rr_equals_rho2(design, ols),
           CheckReport.identity("wls-canonical-rr", closed_form(design, ols).rr, 0.36, 1e-12,
                                "rho2-rr-identity-n2")]
    gamma, rho2_pred, _ = prediction_gamma(design, ols, target)
    out.append(CheckReport.identity("prediction-gamma", gamma, 5 / 9, 1e-12, "prediction-adjustment",
                                    detail={"rho2_pred": rho2_pred}))
    blue = WeightVector.blue(design)
    out.append(CheckReport.identity("blue-corr-zero", corr_n2(design, blue), 0.0, 1e-12, "rho2-rr-identity-n2"))
    out.append(CheckReport.identity("blue-rr-zero", closed_form(design, blue).rr, 0.0, 1e-12,
                                    "rho2-rr-identity-n2"))

    n_designs = 200
    u = stream.uniform(6 * n_designs).reshape(n_designs, 6)
    devs = []
    for row in u:
        x = np.where(row[:2] < 0.5, -1, 1) * (0.2 + 3 * row[2:4])
        d = HeteroDesign(x, np.exp(3 * (row[4:6] - 0.5)))
        w = WeightVector(np.exp(2 * (stream.uniform(2) - 0.5)))
        r = identity_rr_equals_rho2(d, w)
        devs.append(abs(r.lhs - r.rhs))
    out.append(CheckReport.identity("wls-rho2-equals-rr-random-designs", max(devs), 0.0, 1e-10,
                                    "rho2-rr-identity-n2", detail={"designs": n_designs}))
    return out


def _wls_n3(cfg, stream):
    from .wls import HeteroDesign, WeightVector, rr_bound_check
    return [rr_bound_check(HeteroDesign([1.0, 2.0, -0.5], [1.0, 4.0, 0.25]), WeightVector.ols(3))]


def _wls_mc(cfg, stream):
    from .wls import mc_verify
    design, ols, target = _canonical()
    return mc_verify(design, ols, target, cfg.reps, stream, workers=cfg.workers)


# ---------------------------------------------------------------- normal

def _normal_independence(cfg, stream):
    from .normal_lab import NormalModel, conditional_independence_check
    return [conditional_independence_check(NormalModel(0.0, 1.0, 5), cfg.reps, stream, cfg.workers)]


def _joint(gamma2):
    def task(cfg, stream):
        from .normal_lab import PriorSpec, joint_corr_check
        rep = joint_corr_check(PriorSpec.two_point_for_gamma2(gamma2), 2, cfg.reps, stream, cfg.workers)
        rep.name = f"normal-joint-correlation-gamma2={gamma2!r}"
        return [rep]
    return task


def _normal_scan(cfg, stream):
    from .normal_lab import bound_scan
    return bound_scan((2, 3, 5, 10, 30, 100, 1000),
                      (0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0, 1e3, 1e6))


def _normal_mle(cfg, stream):
    from .normal_lab import NormalModel, mle_fisher_demo
    return mle_fisher_demo(NormalModel(0.0, 1.0, 10), cfg.reps, stream, workers=cfg.workers)


# ---------------------------------------------------------------- core

def _theorem1(cfg, stream):
    from .core import battery, verify_theorem1
    out = []
    for sc in battery():
        out.extend(verify_theorem1(sc, cfg.reps, stream, workers=cfg.workers).checks())
    return out


def _equality(cfg, stream):
    from .core import corollary_check, equality_condition_check, gh_tradeoff_report
    from .core.battery import normal_mean_umvue, wls_noisy, wls_ols
    return [equality_condition_check(wls_ols(), 0, cfg.reps, stream.derive("ols"), workers=cfg.workers),
            equality_condition_check(wls_noisy(), 0, cfg.reps, stream.derive("noisy"), workers=cfg.workers),
            gh_tradeoff_report(wls_ols(), 0, cfg.reps, stream.derive("gh"), workers=cfg.workers),
            corollary_check(normal_mean_umvue(), 0, cfg.reps, stream.derive("corollary"), workers=cfg.workers)]


def _improved(cfg, stream):
    from .core import improved_learner
    from .core.battery import wls_ols
    imp = improved_learner(wls_ols(), 0, cfg.reps, stream, workers=cfg.workers)
    return [CheckReport.mc("improved-learner-risk/wls-ols", imp.risk_improved, 0.8,
                           "learning-uncertainty-bound",
                           detail={"lambda_star": imp.lambda_star, "risk_original": imp.risk_original,
                                   "predicted_risk": imp.predicted_risk})]


def _theorem2(cfg, stream):
    from .core import mle_variance, verify_theorem2
    rep = verify_theorem2(mle_variance(), cfg.reps, stream, "pair-minus-s2", cfg.workers)
    out = rep.checks()
    for state, slope in rep.learner_slope_vs_iota.items():
        out.append(CheckReport.identity(f"{rep.scenario}/bias-decay-slope/{state}",
                                        math.nan if slope is None else slope, -1.0, 0.15,
                                        "asymptotic-uncertainty-bound", detail={"iota": rep.iota_list}))
    return out


def _cramer_rao(cfg, stream):
    from .core import constant_learner, cramer_rao_check, normal_mean_score, normal_variance_score
    from .normal_lab import NormalModel
    model = NormalModel(0.0, 2.0, 10)
    out = []
    for pair in (normal_mean_score(model), normal_variance_score(NormalModel(1.0, 2.0, 10)),
                 constant_learner(model)):
        out.extend(cramer_rao_check(pair, cfg.reps, stream, cfg.workers))
    return out


# ---------------------------------------------------------------- quantum

WIGNER_STATES = ("gaussian-s=1.0", "chirped-beta=0.25", "chirped-beta=0.5", "superposition-a=3.0")


def _states(cfg):
    from .quantum import battery_states
    half = None if cfg.grid_span is None else cfg.grid_span / 2
    return battery_states(cfg.hbar, cfg.grid_points, half)


def _quantum_state(label):
    def task(cfg, stream):
        from .quantum import analyse
        return analyse(_states(cfg)[label]).checks
    return task


def _wigner_state(label):
    def task(cfg, stream):
        from .quantum import wigner_compare
        return wigner_compare(_states(cfg)[label])
    return task


def _chirp_margin(cfg, stream):
    from .quantum import gaussian, hbound_check, moments
    out = []
    for beta in (0.25, 0.5):
        psi = gaussian(1.0, beta=beta, hbar=cfg.hbar, n_points=cfg.grid_points,
                       half_width=None if cfg.grid_span is None else cfg.grid_span / 2)
        margin = hbound_check(psi)[0].margin
        out.append(CheckReport.identity(f"chirped-hbound-margin-beta={beta!r}", margin,
                                        (2 * beta * moments(psi).vx) ** 2, 1e-3 * max(1.0, cfg.hbar**2),
                                        "covariance-hbar-bound"))
    return out


# ---------------------------------------------------------------- quasi-score

def _quasi_battery(cfg, stream):
    from .quasiscore import classify_battery
    return [r.check() for r in classify_battery(stream=stream)]


def _quasi_examples(cfg, stream):
    from .quasiscore import example_gradient, rotation_field, symmetry_check
    return [symmetry_check(f(), stream=stream.derive(f().name)).check()
            for f in (rotation_field, example_gradient)]


# ---------------------------------------------------------------- registry

_STATE_LABELS = ("gaussian-s=0.5", "gaussian-s=1.0", "gaussian-s=2.0", "boosted-p0=2.0", "boosted-p0=-2.0",
                 "chirped-beta=0.25", "chirped-beta=0.5", "superposition-a=3.0")

SUITES: dict[str, list[tuple[str, Task]]] = {
    "foundations": [("identities", _identities), ("substreams", _substreams)],
    "wls": [("closed-form", _wls_closed), ("n3", _wls_n3), ("mc", _wls_mc)],
    "normal": [("independence", _normal_independence), ("joint-gamma2=2", _joint(2.0)),
               ("joint-gamma2=0", _joint(0.0)), ("scan", _normal_scan), ("mle", _normal_mle)],
    "core": [("theorem1", _theorem1), ("equality", _equality), ("improved", _improved),
             ("theorem2", _theorem2), ("cramer-rao", _cramer_rao)],
    "quantum": [*((f"state/{s}", _quantum_state(s)) for s in _STATE_LABELS),
                ("chirp-margin", _chirp_margin),
                *((f"wigner/{s}", _wigner_state(s)) for s in WIGNER_STATES)],
    "quasiscore": [("battery", _quasi_battery), ("examples", _quasi_examples)],
}


def run_suite(name: str, settings: SuiteSettings, root: RandomStream) -> list[dict]:
    """Run every task of one suite; returns plain dicts tagged with suite and task."""
    base = root.derive(name)
    out = []
    for task_name, task in SUITES[name]:
        try:
            reports = task(settings, base.derive(task_name))
        except Exception as exc:  # a broken task is a failed check, not a crash
            reports = [failure_record("task-error", exc)]
        for r in reports:
            out.append({"suite": name, "task": task_name, "report": r})
    return out
