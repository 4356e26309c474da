import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from learnunc.errors import UsageError
from learnunc.foundations import RandomStream
from learnunc.normal_lab import (
    CEILING,
    NormalModel,
    PriorSpec,
    bound_scan,
    conditional_independence_check,
    inverse_information_at_mle,
    joint_corr_check,
    joint_corr_formula,
    joint_corr_mc,
    mle_fisher_demo,
    observed_information,
)


def corr_from_prior_moments(n, m1, m2):
    """corr(S^2/n, (Xbar-mu)^2) from E sigma^2 and E sigma^4, by conditioning on sigma^2.

    Given sigma^2: both have mean sigma^2/n, are independent, and have
    variances 2 sigma^4/n^2 and 2 sigma^4/(n^2 (n-1)).
    """
    v = m2 - m1**2
    var_err = (2 * m2 + v) / n**2
    var_est = (2 * m2 / (n - 1) + v) / n**2
    return (v / n**2) / math.sqrt(var_err * var_est)


class TestFormula:
    def test_examples(self):
        assert joint_corr_formula(7, 0.0) == 0
        assert joint_corr_formula(2, 2.0) == pytest.approx(0.25, abs=1e-15)
        assert joint_corr_formula(201, 1e6) == pytest.approx(1 / math.sqrt(3 * 202 / 200), abs=1e-6)
        assert joint_corr_formula(201, 1e6) == pytest.approx(0.5745, abs=5e-5)

    @given(st.integers(2, 10_000), st.floats(0.0, 1e8))
    @settings(max_examples=300, deadline=None)
    def test_range(self, n, g2):
        assert 0 <= joint_corr_formula(n, g2) < CEILING

    @given(st.integers(2, 500), st.floats(1e-3, 1e4), st.floats(0.01, 0.5))
    @settings(max_examples=200, deadline=None)
    def test_matches_moment_oracle(self, n, g2, frac):
        prior = PriorSpec.two_point_for_gamma2(g2, low=0.7, p_high=frac / (1 + g2))
        lo, hi, q = prior.params["low"], prior.params["high"], prior.params["p_high"]
        m1 = (1 - q) * lo + q * hi
        m2 = (1 - q) * lo**2 + q * hi**2
        assert prior.gamma2 == pytest.approx(g2, rel=1e-9)
        assert joint_corr_formula(n, prior.gamma2) == pytest.approx(corr_from_prior_moments(n, m1, m2), rel=1e-9)

    def test_strictly_increasing_dense_grid(self):
        g = np.concatenate([[0.0], np.logspace(-4, 6, 2000)])
        for n in (2, 3, 10, 100, 1000):
            assert np.all(np.diff([joint_corr_formula(n, x) for x in g]) > 0)

    def test_invalid(self):
        with pytest.raises(UsageError):
            joint_corr_formula(1, 1.0)
        with pytest.raises(UsageError):
            joint_corr_formula(3, -1.0)


class TestPriors:
    def test_closed_form_gamma2(self):
        assert PriorSpec.log_normal(0.3, 0.5).gamma2 == pytest.approx(math.exp(0.5) - 1)
        assert PriorSpec.inverse_gamma(6.0, 2.0).gamma2 == pytest.approx(0.25)
        assert PriorSpec.point(3.0).gamma2 == 0

    def test_heavy_inverse_gamma_refused(self):
        with pytest.raises(UsageError, match="fourth"):
            PriorSpec.inverse_gamma(4.0)

    def test_two_point_infeasible_weight(self):
        with pytest.raises(UsageError):
            PriorSpec.two_point_for_gamma2(2.0, p_high=0.5)

    def test_sampled_moments_match(self):
        for prior in (PriorSpec.log_normal(0.0, 0.5), PriorSpec.inverse_gamma(9.0, 3.0),
                      PriorSpec.two_point_for_gamma2(2.0)):
            s = prior.draw_sigma2(RandomStream(3).replications(0, 400_000))
            g2 = s.var() / s.mean() ** 2
            assert g2 == pytest.approx(prior.gamma2, rel=0.05)


class TestMonteCarlo:
    @pytest.mark.parametrize("model", [NormalModel(0, 1, 5), NormalModel(10, 4, 2), NormalModel(-1, 0.3, 80)])
    def test_conditional_independence(self, model):
        assert conditional_independence_check(model, 200_000, RandomStream(11)).passed

    def test_two_point_n2(self):
        r = joint_corr_check(PriorSpec.two_point_for_gamma2(2.0), 2, 200_000, RandomStream(12))
        assert r.passed and r.rhs == pytest.approx(0.25)

    def test_point_prior(self):
        assert joint_corr_check(PriorSpec.point(2.0), 6, 100_000, RandomStream(13)).passed

    def test_log_normal_n10(self):
        assert joint_corr_check(PriorSpec.log_normal(0.0, 0.5), 10, 200_000, RandomStream(14)).passed

    def test_large_n_uses_chi_square_route(self):
        assert joint_corr_check(PriorSpec.inverse_gamma(7.0), 120, 200_000, RandomStream(15)).passed

    def test_mu_prior_does_not_matter(self):
        fixed = PriorSpec.two_point_for_gamma2(1.0)
        spread = PriorSpec.two_point_for_gamma2(1.0, mu_sd=10.0)
        assert joint_corr_check(fixed, 4, 200_000, RandomStream(16)).passed
        assert joint_corr_check(spread, 4, 200_000, RandomStream(16)).passed

    def test_reproducible_bitwise(self):
        p = PriorSpec.log_normal(0.0, 0.4)
        a = joint_corr_mc(p, 7, 20_000, RandomStream(5))
        b = joint_corr_mc(p, 7, 20_000, RandomStream(5), workers=3)
        assert a == b

    def test_detects_wrong_formula(self):
        # the same simulation is far from the fixed-sigma^2 answer of zero
        est = joint_corr_mc(PriorSpec.two_point_for_gamma2(2.0), 2, 200_000, RandomStream(12))
        assert abs(est.value) > 10 * est.std_error


class TestBoundScan:
    def test_full_scan(self):
        reports = bound_scan(range(2, 201), np.logspace(-3, 6, 60))
        assert all(r.passed for r in reports)
        assert reports[0].lhs < 0.57735
        assert reports[1].detail["strict"]

    def test_zero_row(self):
        reports = bound_scan([2, 5, 50], [0.0])
        assert reports[0].lhs == 0

    def test_empty(self):
        with pytest.raises(UsageError):
            bound_scan([], [1.0])


class TestFisher:
    def test_hand_value(self):
        # sigma_hat^2 = 2 at n = 8: ss = 16
        assert inverse_information_at_mle(0.3, 16.0, 8) == pytest.approx(1.0, abs=1e-15)

    def test_hessian_by_finite_differences(self):
        x = RandomStream(1).normal(9) * 1.5 + 0.4
        n, xbar, ss = x.size, x.mean(), ((x - x.mean()) ** 2).sum()

        def loglik(mu, v):
            return -0.5 * n * math.log(v) - ((x - mu) ** 2).sum() / (2 * v)

        mu, v, h = 0.1, 1.7, 1e-4
        fd_mm = -(loglik(mu + h, v) - 2 * loglik(mu, v) + loglik(mu - h, v)) / h**2
        fd_vv = -(loglik(mu, v + h) - 2 * loglik(mu, v) + loglik(mu, v - h)) / h**2
        fd_mv = -(loglik(mu + h, v + h) - loglik(mu + h, v - h) - loglik(mu - h, v + h)
                  + loglik(mu - h, v - h)) / (4 * h * h)
        np.testing.assert_allclose(observed_information(xbar, ss, n, mu, v), [fd_mm, fd_mv, fd_vv], rtol=1e-5)

    def test_demo(self):
        reports = mle_fisher_demo(NormalModel(0, 1, 5), 100_000, RandomStream(21))
        assert all(r.passed for r in reports), [r.to_dict() for r in reports if not r.passed]
        names = [r.name for r in reports]
        assert names[0] == "mle-inverse-information"
        assert sum(n.startswith("log-variance-pivot") for n in names) == 3

    def test_pivot_check_has_power(self):
        # a non-pivotal quantity (the raw MLE) is clearly rejected by the same KS rule
        from scipy.stats import ks_2samp
        s = RandomStream(2)
        a = 0.25 * 2 * s.derive("a").gamma(2.0, 100_000) / 5
        b = 4.0 * 2 * s.derive("b").gamma(2.0, 100_000) / 5
        assert ks_2samp(a, b).statistic > 1.628 * math.sqrt(2 / 100_000)

    def test_needs_n3(self):
        with pytest.raises(UsageError):
            mle_fisher_demo(NormalModel(0, 1, 2), 100)
