from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from learnunc.errors import NumericalError, UsageError
from learnunc.foundations import (
    FiniteJoint,
    GridFunction,
    RandomStream,
    corr_estimate,
    eve_law_check,
    finite_diff,
    hoeffding_cov,
    mc_moments,
    per_replication,
    quadrature,
    simulate,
)


def enumerate_moments(g, h, probs):
    """Exact moments by listing every outcome with Fraction weights."""
    outcomes = [(Fraction(gi), Fraction(hj), Fraction(probs[i][j]))
                for i, gi in enumerate(g) for j, hj in enumerate(h)]
    eg = sum(p * a for a, _, p in outcomes)
    eh = sum(p * b for _, b, p in outcomes)
    cov = sum(p * (a - eg) * (b - eh) for a, b, p in outcomes)
    var_h = sum(p * (b - eh) ** 2 for _, b, p in outcomes)
    e_var = var_e = Fraction(0)
    for gi in set(a for a, _, _ in outcomes):
        rows = [(b, p) for a, b, p in outcomes if a == gi]
        pg = sum(p for _, p in rows)
        if pg == 0:
            continue
        m = sum(p * b for b, p in rows) / pg
        v = sum(p * (b - m) ** 2 for b, p in rows) / pg
        e_var += pg * v
        var_e += pg * (m - eh) ** 2
    return {"cov": cov, "var_h": var_h, "e_var": e_var, "var_e": var_e}


# ---------------------------------------------------------------- RNG


class TestPhilox:
    @pytest.mark.parametrize("ctr, key, expected", [
        ((0, 0, 0, 0), (0, 0), (0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8)),
        ((0xffffffff,) * 4, (0xffffffff,) * 2, (0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd)),
        ((0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344), (0xa4093822, 0x299f31d0),
         (0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1)),
    ])
    def test_known_answers(self, ctr, key, expected):
        from learnunc.foundations import philox4x32
        out = philox4x32([np.array([c]) for c in ctr], key)
        assert tuple(int(o[0]) for o in out) == expected


class TestRandomStream:
    def test_same_identity_same_draws(self):
        a = RandomStream(7, 3)
        b = RandomStream(7, 3)
        RandomStream(7, 4).normal(100)  # consuming another substream changes nothing
        np.testing.assert_array_equal(a.normal(10), b.normal(10))

    def test_substreams_differ(self):
        assert not np.array_equal(RandomStream(7, 0).uniform(8), RandomStream(7, 1).uniform(8))

    def test_block_rows_equal_scalar_substreams(self):
        block = RandomStream(11).replications(5, 12)
        u = block.uniform(3)
        z = block.normal(5)
        for r, i in enumerate(range(5, 12)):
            s = RandomStream(11, i)
            np.testing.assert_array_equal(s.uniform(3), u[r])
            np.testing.assert_array_equal(s.normal(5), z[r])

    def test_cursor_advances(self):
        s = RandomStream(1)
        first, second = s.uniform(4), s.uniform(4)
        np.testing.assert_array_equal(np.concatenate([first, second]), RandomStream(1).uniform(8))

    def test_uniform_open_interval_and_moments(self):
        u = RandomStream(2).uniform(200_000)
        assert u.min() > 0 and u.max() < 1
        assert abs(u.mean() - 0.5) < 3.5 * np.sqrt(1 / 12 / u.size)

    def test_normal_moments(self):
        z = RandomStream(3).normal(200_000)
        se = 1 / np.sqrt(z.size)
        assert abs(z.mean()) < 3.5 * se
        assert abs(z.var() - 1) < 3.5 * np.sqrt(2) * se

    def test_derive_is_stable_and_distinct(self):
        s = RandomStream(42)
        assert s.derive("a").seed == RandomStream(42).derive("a").seed
        assert s.derive("a").seed != s.derive("b").seed

    def test_bad_seed(self):
        with pytest.raises(UsageError):
            RandomStream(-1)
        with pytest.raises(UsageError):
            RandomStream(2 ** 64)

    @given(st.integers(0, 2 ** 64 - 1), st.integers(0, 2 ** 64 - 1))
    @settings(max_examples=30, deadline=None)
    def test_any_identity_reproducible(self, seed, idx):
        np.testing.assert_array_equal(RandomStream(seed, idx).uniform(6), RandomStream(seed, idx).uniform(6))


# ---------------------------------------------------------------- MC engine


def _const(block):
    n = len(block)
    return np.ones(n), np.full(n, 2.0)


def _same(block):
    z = block.normal(1)[:, 0]
    return z, z


def _indep(block):
    z = block.normal(2)
    return z[:, 0], z[:, 1]


class TestMcMoments:
    def test_constant_sampler_is_degenerate(self):
        m = mc_moments(_const, 100, RandomStream(0))
        assert m.var_g.value == 0 and m.cov_gh.value == 0
        assert m.corr_gh.value == 0 and m.corr_gh.degenerate

    def test_perfect_dependence(self):
        m = mc_moments(_same, 200_000, RandomStream(0))
        assert abs(m.corr_gh.value - 1) < 1e-6

    def test_independent_normals(self):
        m = mc_moments(_indep, 200_000, RandomStream(0))
        assert abs(m.corr_gh.value) <= 3.5 * m.corr_gh.std_error

    def test_consistency_and_bounds(self):
        m = mc_moments(lambda b: (b.normal(1)[:, 0], b.uniform(1)[:, 0] + b.normal(1)[:, 0]),
                       50_000, RandomStream(5))
        assert -1 - 1e-9 <= m.corr_gh.value <= 1 + 1e-9
        assert abs(m.cov_gh.value / np.sqrt(m.var_g.value * m.var_h.value) - m.corr_gh.value) < 1e-9

    def test_se_matches_contribution_sd(self):
        m = mc_moments(_indep, 10_000, RandomStream(9))
        cols = simulate(_indep, 10_000, RandomStream(9))
        g = cols["0"]
        assert m.mean_g.std_error == pytest.approx(g.std(ddof=1) / 100)

    def test_reps_below_two(self):
        with pytest.raises(UsageError):
            mc_moments(_indep, 1, RandomStream(0))

    def test_non_finite_names_replication(self):
        def bad(block):
            g = np.zeros(len(block))
            g[block.indices == 17] = np.nan
            return g, g

        with pytest.raises(NumericalError, match="replication 17"):
            mc_moments(bad, 100, RandomStream(0))

    def test_worker_count_and_chunking_do_not_change_bits(self):
        a = simulate(_indep, 30_000, RandomStream(4), workers=1)
        b = simulate(_indep, 30_000, RandomStream(4), workers=4)
        c = simulate(_indep, 30_000, RandomStream(4), chunk=1000)
        for k in a:
            np.testing.assert_array_equal(a[k], b[k])
            np.testing.assert_array_equal(a[k], c[k])

    def test_scalar_and_block_samplers_agree(self):
        scalar = per_replication(lambda s: tuple(s.normal(2)))
        a = simulate(scalar, 300, RandomStream(8))
        b = simulate(_indep, 300, RandomStream(8))
        np.testing.assert_array_equal(a["0"], b["0"])
        np.testing.assert_array_equal(a["1"], b["1"])

    def test_corr_se_against_replicated_spread(self):
        # the spread of 40 independent correlation estimates matches the reported SE
        ests = [corr_estimate(*_indep(RandomStream(100 + k).replications(0, 2000))) for k in range(40)]
        spread = np.std([e.value for e in ests], ddof=1)
        se = np.mean([e.std_error for e in ests])
        assert 0.7 < spread / se < 1.4


# ---------------------------------------------------------------- identities

P4 = [[0.1, 0.2], [0.3, 0.4]]


class TestEveLaw:
    def test_independent(self):
        r = eve_law_check(FiniteJoint([0, 1], [0, 1], [[0.25, 0.25], [0.25, 0.25]]))
        assert r.lhs == pytest.approx(0.25)
        assert r.detail["expected_conditional_variance"] == pytest.approx(0.25)
        assert r.detail["variance_of_conditional_mean"] == pytest.approx(0.0, abs=1e-15)
        assert r.passed

    def test_h_equals_g(self):
        r = eve_law_check(FiniteJoint([0, 1], [0, 1], [[0.5, 0], [0, 0.5]]))
        assert r.detail["expected_conditional_variance"] == pytest.approx(0.0, abs=1e-15)
        assert r.detail["variance_of_conditional_mean"] == pytest.approx(0.25)

    def test_enumeration_oracle(self):
        exact = enumerate_moments([0, 1], [0, 1], P4)
        r = eve_law_check(FiniteJoint([0, 1], [0, 1], P4))
        assert abs(r.lhs - r.rhs) <= 1e-15
        assert r.lhs == pytest.approx(float(exact["var_h"]), abs=1e-15)
        assert r.detail["expected_conditional_variance"] == pytest.approx(float(exact["e_var"]), abs=1e-15)
        assert r.detail["variance_of_conditional_mean"] == pytest.approx(float(exact["var_e"]), abs=1e-15)

    def test_invalid_joint(self):
        with pytest.raises(UsageError):
            FiniteJoint([0, 1], [0, 1], [[0.5, 0.5], [0.5, 0.5]])
        with pytest.raises(UsageError):
            FiniteJoint([0, 1], [0, 1], [[1.2, -0.2], [0, 0]])


class TestHoeffding:
    def test_independent(self):
        r = hoeffding_cov(FiniteJoint([0, 1], [0, 1], [[0.25, 0.25], [0.25, 0.25]]))
        assert r.lhs == pytest.approx(0, abs=1e-15) and r.rhs == pytest.approx(0, abs=1e-15)

    def test_comonotone(self):
        r = hoeffding_cov(FiniteJoint([0, 1], [0, 1], [[0.5, 0], [0, 0.5]]))
        assert r.lhs == pytest.approx(0.25) and r.rhs == pytest.approx(0.25)

    def test_enumeration_oracle(self):
        exact = float(enumerate_moments([0, 1], [0, 1], P4)["cov"])
        r = hoeffding_cov(FiniteJoint([0, 1], [0, 1], P4))
        assert abs(r.lhs - exact) <= 1e-12 and abs(r.rhs - exact) <= 1e-12

    def test_unsorted_support(self):
        a = hoeffding_cov(FiniteJoint([3, -1, 0.5], [2, -2], [[0.1, 0.2], [0.3, 0.1], [0.2, 0.1]]))
        assert a.passed


def test_random_joints_both_identities():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        j = FiniteJoint.random(rng, 6)
        exact = enumerate_moments(j.support_g, j.support_h, j.probs)
        e, hcov = eve_law_check(j, tol=1e-10), hoeffding_cov(j, tol=1e-10)
        assert e.passed and hcov.passed
        assert abs(hcov.lhs - float(exact["cov"])) < 1e-10


# ---------------------------------------------------------------- grid


class TestGrid:
    def test_constant_integral(self):
        assert quadrature(GridFunction.sample(np.ones_like, 0, 1, 101)) == 1.0

    def test_linear_derivative(self):
        for order in (2, 4):
            d = finite_diff(GridFunction.sample(lambda x: x, 0, 1, 101), order=order)
            np.testing.assert_allclose(d.values, 1.0, atol=1e-12)

    def test_quadratic_integral(self):
        assert abs(quadrature(GridFunction.sample(lambda x: x ** 2, 0, 2, 401)) - 8 / 3) < 1e-4

    @given(st.floats(-5, 5), st.floats(-5, 5), st.integers(8, 300))
    @settings(max_examples=50, deadline=None)
    def test_affine_exactness(self, a, b, n):
        f = GridFunction.sample(lambda x: a * x + b, -1.5, 2.5, n)
        assert abs(quadrature(f) - (a * (2.5 ** 2 - 1.5 ** 2) / 2 + 4 * b)) < 1e-12 * (1 + abs(a) + abs(b)) * 10
        np.testing.assert_allclose(finite_diff(f).values, a, atol=1e-12 * (1 + abs(a) + abs(b)) * 100)

    def test_second_order_convergence(self):
        errs = []
        for n in (201, 401):
            f = GridFunction.sample(np.sin, 0, 3, n)
            errs.append(np.max(np.abs(finite_diff(f).values[1:-1] - np.cos(f.x[1:-1]))))
        assert 3.5 < errs[0] / errs[1] < 4.5

    def test_too_few_points(self):
        with pytest.raises(UsageError):
            GridFunction(0, 1, np.zeros(7))

    def test_non_finite(self):
        with pytest.raises(UsageError):
            GridFunction(0, 1, np.array([np.nan] * 10))
