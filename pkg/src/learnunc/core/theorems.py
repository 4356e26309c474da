"""Monte-Carlo verification of the relevance/regret trade-off for learners and error assessors.

For a learner Q_hat with error delta = Q_hat - Q and an assessor delta_hat,
the checks compare rho^2(delta, delta_hat) with the relative regret
RR = 1 - R_opt / R(Q_hat), and probe the improved learner
Q_hat - lambda* delta_hat that the comparison rests on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ScenarioInvalidError, UsageError
from ..foundations import (
    McEstimate,
    RandomStream,
    corr2_estimate,
    corr_estimate,
    mean_estimate,
    second_moment_estimate,
    simulate,
)
from ..report import MC_LEVEL, CheckReport
from .scenario import AsymptoticScenario, Scenario

SLACK_FLOOR = 1e-9
DECAY_MIN_SLOPE = 0.85


def _stream_for(stream: RandomStream, scenario: Scenario, state: dict, purpose: str = "") -> RandomStream:
    return stream.derive(f"{scenario.name}/{state.get('label', '')}/{purpose}")


def _columns(scenario, state, reps, stream, workers, purpose=""):
    return simulate(lambda block: scenario.simulate(state, block), reps,
                    _stream_for(stream, scenario, state, purpose), workers)


def lambda_star_estimate(err, h) -> McEstimate:
    """Regression slope Cov(err, h) / V(h); zero and flagged when V(h) = 0."""
    err = np.asarray(err, dtype=float)
    h = np.asarray(h, dtype=float)
    dh = h - h.mean()
    vh = dh @ dh / (h.size - 1)
    if vh <= 0:
        return McEstimate(0.0, 0.0, h.size, degenerate=True)
    de = err - err.mean()
    lam = (de @ dh) / (h.size - 1) / vh
    psi = dh * (de - lam * dh) / vh
    return McEstimate(float(lam), float(psi.std(ddof=1) / math.sqrt(h.size)), h.size)


@dataclass
class PairStats:
    """MC summary of one (learner error, assessor) pair at one state."""

    bias: McEstimate
    assessor_mean: McEstimate
    risk: McEstimate
    rho2: McEstimate
    rho: McEstimate
    lambda_star: McEstimate
    var_err: float

    @classmethod
    def of(cls, err, h) -> PairStats:
        err = np.asarray(err, dtype=float)
        return cls(mean_estimate(err), mean_estimate(h), second_moment_estimate(err),
                   corr2_estimate(err, h), corr_estimate(err, h), lambda_star_estimate(err, h),
                   float(err.var(ddof=1)))


def relative_regret(risk: McEstimate, optimal_risk: float) -> McEstimate:
    """1 - R_opt / R with a delta-method SE; 0 by convention when R = 0."""
    if risk.value == 0:
        return McEstimate(0.0, 0.0, risk.reps, degenerate=True)
    rr = 1.0 - optimal_risk / risk.value
    return McEstimate(rr, optimal_risk * risk.std_error / risk.value**2, risk.reps)


@dataclass
class StateRecord:
    scenario: str
    state: str
    assessor: str
    rho2: McEstimate
    rr: McEstimate
    risk: McEstimate
    optimal_risk: float
    optimum: str
    lambda_star: McEstimate
    bound: float = 0.0  # extra allowance on top of RR (asymptotic remainder)
    iota: int | None = None
    note: str = ""
    detail: dict = field(default_factory=dict)

    @property
    def combined_se(self) -> float:
        return math.hypot(self.rho2.std_error, self.rr.std_error)

    @property
    def tolerance(self) -> float:
        return MC_LEVEL * self.combined_se + SLACK_FLOOR

    @property
    def slack(self) -> float:
        return self.rr.value + self.bound - self.rho2.value

    @property
    def passed(self) -> bool:
        return self.slack >= -self.tolerance

    @property
    def equality(self) -> bool:
        """rho^2 and RR indistinguishable at the MC level."""
        return abs(self.rho2.value - self.rr.value - self.bound) <= MC_LEVEL * self.combined_se + SLACK_FLOOR

    def check(self) -> CheckReport:
        name = f"{self.scenario}/{self.state}/{self.assessor}"
        if self.iota is not None:
            name = f"{self.scenario}/n={self.iota}/{self.state}/{self.assessor}"
        detail = {"rho2_se": self.rho2.std_error, "rr_se": self.rr.std_error, "risk": self.risk.value,
                  "optimal_risk": self.optimal_risk, "optimum": self.optimum,
                  "lambda_star": self.lambda_star.value, "equality": self.equality, **self.detail}
        if self.bound:
            detail["asymptotic_allowance"] = self.bound
        if self.note:
            detail["note"] = self.note
        return CheckReport.inequality(name, self.rho2.value, self.rr.value + self.bound, self.tolerance,
                                      "learning-uncertainty-bound", mc_se=self.combined_se, detail=detail)

    def to_dict(self):
        return self.check().to_dict()


@dataclass
class TheoremReport:
    scenario: str
    records: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def checks(self) -> list[CheckReport]:
        return [r.check() for r in self.records]

    def record(self, state=None, assessor=None) -> StateRecord:
        for r in self.records:
            if (state is None or r.state == state) and (assessor is None or r.assessor == assessor):
                return r
        raise KeyError((state, assessor))


def certify(scenario: Scenario, state: dict, stats: PairStats, assessor: str, optimal_risk: float):
    """Unbiasedness of learner and assessor, and sanity of the declared optimum."""
    label = f"{scenario.name}/{state.get('label')}"
    if not stats.bias.within(0.0, MC_LEVEL):
        raise ScenarioInvalidError(f"{label}: learner bias {stats.bias.value:.3g} "
                                   f"(SE {stats.bias.std_error:.2g}) is not zero")
    if not stats.assessor_mean.within(0.0, MC_LEVEL):
        raise ScenarioInvalidError(f"{label}: assessor {assessor!r} has mean {stats.assessor_mean.value:.3g} "
                                   f"(SE {stats.assessor_mean.std_error:.2g})")
    if optimal_risk > stats.risk.value + MC_LEVEL * stats.risk.std_error:
        raise ScenarioInvalidError(f"{label}: declared optimal risk {optimal_risk:.4g} exceeds the "
                                   f"learner's MC risk {stats.risk.value:.4g}")


def _record(scenario, state, assessor, stats, r_opt, **kw) -> StateRecord:
    rec = StateRecord(scenario.name, state.get("label", ""), assessor, stats.rho2,
                      relative_regret(stats.risk, r_opt), stats.risk, r_opt, scenario.optimum,
                      stats.lambda_star, **kw)
    if scenario.optimum == "family-minimum" and not rec.passed:
        # R(1 - rho^2) is achievable, so the declared family optimum is beaten, not the inequality
        rec.note = "declared optimum not optimal"
    return rec


def _select(scenario: Scenario, assessors):
    if assessors is None:
        return list(scenario.assessors)
    if isinstance(assessors, str):
        assessors = [assessors]
    for a in assessors:
        scenario.check_assessor(a)
    return list(assessors)


def verify_theorem1(scenario: Scenario, reps: int = 200_000, stream: RandomStream | None = None,
                    assessors=None, workers: int = 1, states=None) -> TheoremReport:
    """rho^2(delta, delta_hat) <= RR at every state, for each selected assessor."""
    stream = stream if stream is not None else RandomStream(0)
    names = _select(scenario, assessors)
    chosen = scenario.states if states is None else [scenario.state(s) for s in states]
    records = []
    for state in chosen:
        cols = _columns(scenario, state, reps, stream, workers)
        err = cols["learner"] - cols["target"]
        r_opt = float(scenario.optimal_risk(state))
        for a in names:
            stats = PairStats.of(err, cols[a])
            certify(scenario, state, stats, a, r_opt)
            records.append(_record(scenario, state, a, stats, r_opt))
    return TheoremReport(scenario.name, records)


@dataclass
class ImprovedLearner:
    lambda_star: float
    risk_improved: McEstimate
    risk_original: McEstimate
    predicted_risk: float
    degenerate: bool

    def __iter__(self):
        yield self.lambda_star
        yield self.risk_improved

    def to_dict(self):
        return {"lambda_star": self.lambda_star, "risk_improved": self.risk_improved,
                "risk_original": self.risk_original, "predicted_risk": self.predicted_risk,
                "degenerate": self.degenerate}


def improved_learner(scenario: Scenario, s=0, reps: int = 200_000, stream: RandomStream | None = None,
                     assessor: str | None = None, workers: int = 1) -> ImprovedLearner:
    """Estimate lambda* on one stream, then measure the risk of Q_hat - lambda* delta_hat on a fresh one.

    Using a separate stream keeps the risk estimate free of the selection
    effect of fitting lambda on the same draws.
    """
    stream = stream if stream is not None else RandomStream(0)
    state = scenario.state(s)
    a = assessor or scenario.primary
    scenario.check_assessor(a)
    fit = _columns(scenario, state, reps, stream, workers)
    err = fit["learner"] - fit["target"]
    lam = lambda_star_estimate(err, fit[a])
    rho2 = corr2_estimate(err, fit[a])
    predicted = float(err.var(ddof=1) * (1 - rho2.value))
    held = _columns(scenario, state, reps, stream, workers, purpose="holdout")
    err_h = held["learner"] - held["target"]
    improved = err_h - lam.value * held[a]
    return ImprovedLearner(lam.value, second_moment_estimate(improved), second_moment_estimate(err_h),
                           predicted, lam.degenerate)


def equality_condition_check(scenario: Scenario, s=0, reps: int = 200_000,
                             stream: RandomStream | None = None, assessor: str | None = None,
                             workers: int = 1) -> CheckReport:
    """Two detections of the equality case must agree.

    (a) the improved learner reaches the optimal risk; (b) rho^2 equals RR.
    """
    stream = stream if stream is not None else RandomStream(0)
    state = scenario.state(s)
    a = assessor or scenario.primary
    imp = improved_learner(scenario, state, reps, stream, a, workers)
    r_opt = float(scenario.optimal_risk(state))
    by_risk = abs(imp.risk_improved.value - r_opt) <= MC_LEVEL * imp.risk_improved.std_error
    rec = verify_theorem1(scenario, reps, stream, a, workers, states=[state]).records[0]
    by_corr = rec.equality
    return CheckReport.identity(
        f"equality-condition/{scenario.name}/{state.get('label')}/{a}", float(by_risk), float(by_corr),
        0.0, "equality-attainability",
        detail={"equality_by_risk": by_risk, "equality_by_correlation": by_corr,
                "risk_improved": imp.risk_improved, "optimal_risk": r_opt,
                "rho2": rec.rho2.value, "rr": rec.rr.value, "lambda_star": imp.lambda_star})


def corollary_check(scenario: Scenario, s=0, reps: int = 200_000, stream: RandomStream | None = None,
                    workers: int = 1) -> CheckReport:
    """For a learner declared optimal, every registered assessor has correlation zero.

    The returned record is the assessor with the largest |rho| / SE; all
    correlations are listed in ``detail``.
    """
    if not scenario.optimal:
        raise UsageError(f"scenario {scenario.name!r} does not declare an optimal learner; "
                         "the zero-correlation conclusion does not apply")
    stream = stream if stream is not None else RandomStream(0)
    state = scenario.state(s)
    cols = _columns(scenario, state, reps, stream, workers)
    err = cols["learner"] - cols["target"]
    corrs = {a: corr_estimate(err, cols[a]) for a in scenario.assessors}
    worst = max(corrs, key=lambda a: abs(corrs[a].zscore(0.0)))
    return CheckReport.mc(f"optimal-learner-irrelevance/{scenario.name}/{state.get('label')}",
                          corrs[worst], 0.0, "optimal-learner-irrelevance",
                          detail={"assessor": worst, "correlations": corrs})


# ---------------------------------------------------------------- asymptotic version


def decay_slope(values, ses, rates, min_slope: float = DECAY_MIN_SLOPE) -> dict:
    """Does |value| shrink at least like ``rate``?

    Values indistinguishable from zero at every index pass outright;
    otherwise the log-log slope of |value| against the rate must reach
    ``min_slope``.
    """
    values, ses, rates = (np.asarray(v, dtype=float) for v in (values, ses, rates))
    negligible = bool(np.all(np.abs(values) <= MC_LEVEL * ses))
    if negligible:
        return {"negligible": True, "slope": None, "passed": True}
    mag = np.maximum(np.abs(values), np.finfo(float).tiny)
    slope = float(np.polyfit(np.log(rates), np.log(mag), 1)[0])
    return {"negligible": False, "slope": slope, "passed": slope >= min_slope}


@dataclass
class AsymptoticReport:
    scenario: str
    assessor: str
    iota_list: list
    rates: list
    per_iota: list                      # TheoremReport per iota
    learner_bias: dict                  # state -> decay_slope result
    assessor_bias: dict
    correction: dict                    # state -> decay_slope of lambda* * b
    k_values: list                      # max_s (a - lambda* b)^2 / e^2 per iota

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.per_iota)

    @property
    def k_ratio(self) -> float:
        k = np.asarray(self.k_values)
        return float(k.max() / k.min()) if k.min() > 0 else math.inf

    @property
    def learner_slope_vs_iota(self) -> dict:
        """Bias slope against the index itself (rate 1/n gives about -1)."""
        return {s: (None if v["slope"] is None else -v["slope"]) for s, v in self.learner_bias.items()}

    def checks(self) -> list[CheckReport]:
        out = [c for t in self.per_iota for c in t.checks()]
        out.append(CheckReport.inequality(
            f"{self.scenario}/{self.assessor}/remainder-constant-spread", self.k_ratio, 10.0, 0.0,
            "asymptotic-uncertainty-bound",
            detail={"k_values": self.k_values, "iota": self.iota_list}))
        return out


def _certify_decay(label, what, results):
    bad = {s: r for s, r in results.items() if not r["passed"]}
    if bad:
        raise ScenarioInvalidError(f"{label}: {what} does not vanish at the error rate "
                                   f"(log-log slopes {({s: r['slope'] for s, r in bad.items()})})")


def verify_theorem2(ascenario: AsymptoticScenario, reps: int = 200_000,
                    stream: RandomStream | None = None, assessor: str | None = None,
                    workers: int = 1) -> AsymptoticReport:
    """Asymptotically unbiased version along the information index.

    Certificates: learner bias, assessor bias and the correction lambda* b
    must all vanish at the error rate (log-log slope >= 0.85) or be
    indistinguishable from zero.  The last one is what keeps the remainder
    (a - lambda* b)^2 of order e^2; an assessor with a vanishing mean but an
    exploding lambda* fails it.

    Per state the asserted bound is the finite-index one,
    rho^2 <= RR + (a - lambda* b)^2 / R, and the reported constant is
    K = max_s (a - lambda* b)^2 / e^2.
    """
    stream = stream if stream is not None else RandomStream(0)
    scenarios = [ascenario.build(i) for i in ascenario.iota_list]
    a_name = assessor or scenarios[0].primary
    scenarios[0].check_assessor(a_name)
    rates = [ascenario.error_rate(i) for i in ascenario.iota_list]

    stats = []  # per iota: list of (state, PairStats, r_opt)
    for sc in scenarios:
        row = []
        for state in sc.states:
            cols = _columns(sc, state, reps, stream, workers)
            err = cols["learner"] - cols["target"]
            row.append((state, PairStats.of(err, cols[a_name]), float(sc.optimal_risk(state))))
        stats.append(row)

    labels = [st.get("label") for st, _, _ in stats[0]]
    learner_bias, assessor_bias, correction = {}, {}, {}
    for k, lab in enumerate(labels):
        col = [row[k][1] for row in stats]
        learner_bias[lab] = decay_slope([p.bias.value for p in col], [p.bias.std_error for p in col], rates)
        assessor_bias[lab] = decay_slope([p.assessor_mean.value for p in col],
                                         [p.assessor_mean.std_error for p in col], rates)
        negl = all(p.assessor_mean.within(0.0) or p.lambda_star.within(0.0) for p in col)
        if negl:
            correction[lab] = {"negligible": True, "slope": None, "passed": True}
        else:
            prod = [p.lambda_star.value * p.assessor_mean.value for p in col]
            correction[lab] = decay_slope(prod, np.zeros(len(prod)), rates)
    label = f"{ascenario.name}/{a_name}"
    _certify_decay(label, "learner bias", learner_bias)
    _certify_decay(label, "assessor mean", assessor_bias)
    _certify_decay(label, "lambda* times assessor mean", correction)

    per_iota, k_values = [], []
    for sc, iota, e, row in zip(scenarios, ascenario.iota_list, rates, stats):
        records, k_iota = [], 0.0
        for state, p, r_opt in row:
            if r_opt > p.risk.value + MC_LEVEL * p.risk.std_error:
                raise ScenarioInvalidError(f"{sc.name}/{state.get('label')}: declared optimal risk "
                                           "exceeds the learner's MC risk")
            rem = (p.bias.value - p.lambda_star.value * p.assessor_mean.value) ** 2
            k_iota = max(k_iota, rem / e**2)
            records.append(_record(sc, state, a_name, p, r_opt, bound=rem / p.risk.value, iota=iota,
                                   detail={"learner_bias": p.bias.value,
                                           "assessor_mean": p.assessor_mean.value,
                                           "remainder": rem, "error_rate": e}))
        per_iota.append(TheoremReport(sc.name, records))
        k_values.append(k_iota)
    return AsymptoticReport(ascenario.name, a_name, list(ascenario.iota_list), rates, per_iota,
                            learner_bias, assessor_bias, correction, k_values)
