import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from learnunc.core import (
    Scenario,
    battery,
    constant_learner,
    corollary_check,
    cramer_rao_check,
    decay_slope,
    equality_condition_check,
    gh_tradeoff_report,
    improved_learner,
    lambda_star_estimate,
    mle_variance,
    normal_mean_score,
    normal_variance_score,
    verify_theorem1,
    verify_theorem2,
)
from learnunc.core.battery import (
    normal_mean_single,
    normal_variance_pair,
    normal_variance_umvue,
    prediction_single,
    wls_blue,
    wls_n3,
    wls_noisy,
    wls_ols,
)
from learnunc.errors import ScenarioInvalidError, UsageError
from learnunc.foundations import RandomStream
from learnunc.normal_lab import NormalModel
from learnunc.wls import HeteroDesign, WeightVector, closed_form

REPS = 200_000


def within(est, target, k=3.5):
    return abs(est.value - target) <= k * est.std_error


def rescaled(sc: Scenario, c: float) -> Scenario:
    """Same scenario with every assessor multiplied by c."""

    def sim(state, block):
        out = sc.simulate(state, block)
        return {k: (v * c if k in sc.assessors else v) for k, v in out.items()}

    return Scenario(sc.name, sc.states, sim, sc.assessors, sc.optimal_risk, sc.optimum, sc.optimal)


@pytest.fixture(scope="module")
def reports():
    return {sc.name: verify_theorem1(sc, REPS, RandomStream(42)) for sc in battery()}


@pytest.fixture(scope="module")
def t2_report():
    return verify_theorem2(mle_variance(), 100_000, RandomStream(10), "pair-minus-s2")


class TestBatteryOracles:
    """Every scenario's rho^2 and RR against hand-derived values."""

    def test_all_pass(self, reports):
        assert len(reports) >= 6
        for name, rep in reports.items():
            assert len({r.state for r in rep.records}) >= 2, name
            assert rep.passed, [r.to_dict() for r in rep.records if not r.passed]

    @pytest.mark.parametrize("n", [5])
    def test_mean_single(self, reports, n):
        rep = reports["normal-mean-single"]
        for r in rep.records:
            assert r.rr.value == pytest.approx(1 - 1 / n, abs=3.5 * r.rr.std_error)
        eq = [r for r in rep.records if r.assessor == "x1-xbar"]
        strict = [r for r in rep.records if r.assessor == "x1-x2"]
        assert all(within(r.rho2, 1 - 1 / n) and r.equality for r in eq)
        assert all(within(r.rho2, 0.5) and not r.equality for r in strict)

    def test_variance_pair(self, reports):
        n = 5
        for r in reports["normal-variance-pair"].records:
            assert within(r.rr, (n - 2) / (n - 1))
            assert r.equality

    def test_prediction_single(self, reports):
        n = 5
        for r in reports["prediction-single"].records:
            expected = (n - 1) / (2 * n) if r.assessor == "x1-xbar" else 0.25
            assert within(r.rho2, expected)
            assert r.equality == (r.assessor == "x1-xbar")

    def test_optimal_learners_have_zero(self, reports):
        for name in ("normal-mean-umvue", "normal-variance-umvue", "prediction-mean", "wls-blue"):
            for r in reports[name].records:
                assert within(r.rr, 0.0) and within(r.rho2, 0.0)

    def test_wls_closed_forms(self, reports):
        sc = wls_ols()
        for st_ in sc.states:
            d = HeteroDesign(st_["x"], st_["sigma2"], st_["theta"])
            cf = closed_form(d, WeightVector.ols(2))
            rec = reports["wls-ols"].record(st_["label"], "r1")
            assert within(rec.rr, cf.rr) and within(rec.rho2, cf.rr)
            assert rec.equality

    def test_noisy_attenuation(self, reports):
        # V(r1) = 1.25 at the canonical design, so the N(0,1) noise keeps 1.25/2.25 = 5/9 of rho^2
        rec = reports["wls-noisy"].records[0]
        assert within(rec.rho2, 0.36 * 5 / 9)
        assert within(rec.rr, 0.36)
        assert not rec.equality

    def test_n3_inequality_only(self, reports):
        rep = reports["wls-n3"]
        assert rep.passed
        assert any(r.slack > 10 * r.tolerance for r in rep.records)


class TestConventions:
    def test_zero_variance_assessor(self):
        base = normal_mean_single()

        def sim(state, block):
            out = base.simulate(state, block)
            return {**out, "zero": np.zeros(len(block))}

        sc = Scenario("with-zero", base.states, sim, ("zero",), base.optimal_risk)
        rec = verify_theorem1(sc, 20_000, RandomStream(1), states=[0]).records[0]
        assert rec.rho2.value == 0 and rec.rho2.degenerate and rec.passed

    def test_zero_risk(self):
        def sim(state, block):
            z = block.normal(2)
            return {"learner": np.zeros(len(block)), "target": np.zeros(len(block)), "h": z[:, 0] - z[:, 1]}

        sc = Scenario("exact", ({"label": "a"}, {"label": "b"}), sim, ("h",), lambda s: 0.0, optimal=True)
        rec = verify_theorem1(sc, 10_000, RandomStream(2)).records[0]
        assert rec.rr.value == 0 and rec.rho2.value == 0 and rec.passed

    def test_biased_learner_is_invalid_not_a_violation(self):
        base = normal_mean_single()

        def sim(state, block):
            out = base.simulate(state, block)
            out["learner"] = out["learner"] + 0.1
            return out

        sc = Scenario("biased", base.states, sim, base.assessors, base.optimal_risk)
        with pytest.raises(ScenarioInvalidError, match="bias"):
            verify_theorem1(sc, REPS, RandomStream(3))

    def test_biased_assessor_is_invalid(self):
        base = normal_mean_single()

        def sim(state, block):
            out = base.simulate(state, block)
            out["x1-x2"] = out["x1-x2"] + 0.2
            return out

        sc = Scenario("biased-h", base.states, sim, base.assessors, base.optimal_risk)
        with pytest.raises(ScenarioInvalidError, match="assessor"):
            verify_theorem1(sc, REPS, RandomStream(3), "x1-x2")

    def test_optimum_above_risk_is_invalid(self):
        base = normal_mean_single()
        sc = Scenario("bad-opt", base.states, base.simulate, base.assessors, lambda s: 2 * s["sigma2"])
        with pytest.raises(ScenarioInvalidError, match="optimal risk"):
            verify_theorem1(sc, REPS, RandomStream(3))

    def test_family_minimum_violation_is_labelled(self):
        # declaring 0.9 sigma^2 as the optimum for X1 is beaten by X1 - lambda*(X1 - Xbar) = Xbar
        base = normal_mean_single()
        sc = Scenario("loose-opt", base.states, base.simulate, base.assessors,
                      lambda s: 0.9 * s["sigma2"], optimum="family-minimum")
        rec = verify_theorem1(sc, REPS, RandomStream(4), "x1-xbar").records[0]
        assert not rec.passed
        assert rec.check().detail["note"] == "declared optimum not optimal"

    def test_unknown_assessor(self):
        with pytest.raises(UsageError, match="no assessor"):
            verify_theorem1(wls_ols(), 100, RandomStream(0), "r9")

    def test_unknown_scenario(self):
        with pytest.raises(UsageError):
            battery(["nope"])


class TestScaleInvariance:
    @given(st.floats(0.05, 50.0), st.booleans())
    @settings(max_examples=8, deadline=None)
    def test_rescaled_assessor(self, c, flip):
        c = -c if flip else c
        a = verify_theorem1(wls_ols(), 50_000, RandomStream(9)).records
        b = verify_theorem1(rescaled(wls_ols(), c), 50_000, RandomStream(9)).records
        for ra, rb in zip(a, b):
            assert rb.rho2.value == pytest.approx(ra.rho2.value, rel=1e-9, abs=1e-14)
            assert rb.rr.value == ra.rr.value
            assert rb.equality == ra.equality


class TestImprovedLearner:
    def test_wls_ols_reaches_blue(self):
        lam, risk = improved_learner(wls_ols(), 0, REPS, RandomStream(5))
        assert within(risk, 0.8)
        # lambda* = Cov(err, r1) / V(r1) = -0.75 / 1.25
        assert lam == pytest.approx(-0.6, abs=0.02)

    def test_noisy_improves_but_not_to_optimum(self):
        imp = improved_learner(wls_noisy(), 0, REPS, RandomStream(5))
        assert imp.risk_improved.value < imp.risk_original.value
        assert imp.risk_improved.value - 0.8 > 10 * imp.risk_improved.std_error
        # V(delta)(1 - rho^2) = 1.25 (1 - 0.2)
        assert within(imp.risk_improved, 1.0)

    def test_uncorrelated_assessor_gives_no_gain(self):
        imp = improved_learner(wls_blue(), 0, REPS, RandomStream(5))
        assert abs(imp.lambda_star) < 0.02
        assert imp.risk_improved.value <= imp.risk_original.value + 3.5 * imp.risk_original.std_error

    def test_degenerate_lambda(self):
        est = lambda_star_estimate(np.arange(5.0), np.ones(5))
        assert est.value == 0 and est.degenerate

    def test_lambda_matches_ols_slope(self):
        rng = np.random.default_rng(0)
        h = rng.normal(size=500)
        e = 2.5 * h + rng.normal(size=500)
        assert lambda_star_estimate(e, h).value == pytest.approx(np.polyfit(h, e, 1)[0], rel=1e-12)


class TestEqualityAndGH:
    @pytest.mark.parametrize("factory, equal", [(wls_ols, True), (wls_noisy, False), (wls_blue, True),
                                                (normal_variance_pair, True)])
    def test_equality_detections_agree(self, factory, equal):
        rep = equality_condition_check(factory(), 0, REPS, RandomStream(6))
        assert rep.passed
        assert rep.detail["equality_by_risk"] is equal

    @pytest.mark.parametrize("factory, equal", [(wls_ols, True), (wls_noisy, False), (prediction_single, True)])
    def test_gh(self, factory, equal):
        rep = gh_tradeoff_report(factory(), 0, REPS, RandomStream(7))
        assert rep.passed and rep.detail["equality"] is equal
        assert rep.detail["raw_lhs"] == pytest.approx(rep.lhs * rep.detail["var_h"])

    def test_gh_optimal_both_zero(self):
        rep = gh_tradeoff_report(normal_variance_umvue(), 0, REPS, RandomStream(7))
        assert rep.passed and abs(rep.lhs) < 1e-3 and abs(rep.rhs) < 0.01


class TestCorollary:
    @pytest.mark.parametrize("name", ["normal-mean-umvue", "wls-blue", "normal-variance-umvue", "prediction-mean"])
    def test_optimal(self, name):
        sc = battery([name])[0]
        rep = corollary_check(sc, 1, REPS, RandomStream(8))
        assert rep.passed and set(rep.detail["correlations"]) == set(sc.assessors)

    def test_refuses_non_optimal(self):
        with pytest.raises(UsageError, match="optimal"):
            corollary_check(wls_ols())


class TestTheorem2:
    def test_slope_and_constant(self, t2_report):
        report = t2_report
        assert report.passed
        for slope in report.learner_slope_vs_iota.values():
            assert slope == pytest.approx(-1, abs=0.15)
        assert report.k_ratio < 10
        assert all(c.passed for c in report.checks())

    def test_constant_near_exact_bias(self, t2_report):
        report = t2_report
        # learner bias is -sigma^2/n, so a^2 / e^2 -> max sigma^4 = 4
        assert all(2.5 < k < 6 for k in report.k_values)

    def test_zero_assessor(self):
        rep = verify_theorem2(mle_variance((10, 30, 100)), 50_000, RandomStream(11), "zero")
        assert rep.passed

    @pytest.mark.parametrize("assessor", ["inverse-information", "bias-estimate"])
    def test_rejected_assessors(self, assessor):
        with pytest.raises(ScenarioInvalidError, match="lambda"):
            verify_theorem2(mle_variance((10, 30, 100)), 50_000, RandomStream(12), assessor)

    def test_slow_bias_rejected(self):
        base = mle_variance((10, 30, 100, 300))

        def build(n):
            sc = base.build(n)

            def sim(state, block):
                out = sc.simulate(state, block)
                out["learner"] = out["learner"] + state["sigma2"] / math.sqrt(n)
                return out

            return Scenario(sc.name, sc.states, sim, sc.assessors, sc.optimal_risk, sc.optimum)

        from learnunc.core import AsymptoticScenario
        slow = AsymptoticScenario("slow", build, base.iota_list, base.error_rate)
        with pytest.raises(ScenarioInvalidError, match="learner bias"):
            verify_theorem2(slow, 50_000, RandomStream(13), "zero")

    def test_decay_slope(self):
        r = np.array([0.1, 0.01, 0.001])
        assert decay_slope(3 * r, np.full(3, 1e-9), r)["slope"] == pytest.approx(1.0)
        assert not decay_slope(np.sqrt(r), np.full(3, 1e-9), r)["passed"]
        assert decay_slope([1e-4, -2e-4, 0.0], [1e-3] * 3, r)["negligible"]


class TestCramerRao:
    def test_normal_mean_equality(self):
        reps = {r.name.split("/")[0]: r for r in cramer_rao_check(normal_mean_score(NormalModel(0, 2, 10)),
                                                                   REPS, RandomStream(14))}
        assert all(r.passed for r in reps.values())
        assert reps["score-covariance"].lhs == pytest.approx(1, abs=0.02)
        assert reps["variance-product"].lhs == pytest.approx(1, abs=0.02)

    def test_normal_variance_strict(self):
        info, cov = cramer_rao_check(normal_variance_score(NormalModel(1, 2, 10)), REPS, RandomStream(15))
        assert info.passed and cov.passed
        # V(S^2) V(score) = n / (n - 1) against Cov^2 = 1
        assert info.rhs == pytest.approx(10 / 9, rel=0.03)
        assert info.margin > 10 * info.mc_se

    def test_constant(self):
        for r in cramer_rao_check(constant_learner(NormalModel(0, 2, 10)), 10_000, RandomStream(16)):
            assert r.passed and r.lhs == 0 and r.rhs == 0

    def test_wls_n3_closed_form(self):
        # sanity that wls_n3 states differ (otherwise the two-state requirement is hollow)
        s = wls_n3().states
        assert s[0]["sigma2"] != s[1]["sigma2"]
