import math

import mpmath
import numpy as np
import pytest
from scipy import special, stats as sps

from rdt_assurance import binomial as bd
from rdt_assurance.binomial import (
    BayesThreshold,
    BetaPrior,
    DesignPrior,
    ExactTest,
    HistoricalData,
    MCMCSettings,
    MixturePrior,
    NormalApprox,
    TestPlan,
)
from rdt_assurance.errors import DomainError, IncoherenceError
from rdt_assurance.stats import RandomStream

MIX = MixturePrior((BetaPrior(106, 2), BetaPrior(38, 2)), (0.6, 0.4))
SCEPTICAL = BetaPrior(6.45, 2)
DESIGN = DesignPrior(78, 2, 200, 1)


def _tail_sum_cutoff(n, pi_t, alpha):
    """Largest c with sum_{y<=c} C(n,y) theta^y (1-theta)^(n-y) <= alpha, by exact rationals."""
    from fractions import Fraction

    theta = Fraction(1) - Fraction(pi_t).limit_denominator(10**9)
    acc, c = Fraction(0), -1
    for y in range(n + 1):
        acc += math.comb(n, y) * theta**y * (1 - theta) ** (n - y)
        if acc > Fraction(alpha).limit_denominator(10**9):
            break
        c = y
    return c


def _beta_binomial_pass(n, c, a, b):
    """Closed-form Pr(Y <= c) when pi ~ beta(a, b) and Y ~ bin(n, 1 - pi)."""
    y = np.arange(c + 1)
    logs = (
        special.gammaln(n + 1) - special.gammaln(y + 1) - special.gammaln(n - y + 1)
        + special.betaln(a + n - y, b + y) - special.betaln(a, b)
    )
    return float(np.exp(logs).sum())


def _mixture_quadrature(prior, n, c, pi_t):
    """Ratio of likelihood-weighted prior mass below pi_t to the total, by mpmath quadrature."""
    with mpmath.workdps(30):
        def integrand(p):
            lik = p ** (n - c) * (1 - p) ** c
            dens = sum(
                w * p ** (comp.a - 1) * (1 - p) ** (comp.b - 1) / mpmath.beta(comp.a, comp.b)
                for comp, w in zip(prior.components, prior.weights)
            )
            return lik * dens

        grid = list(mpmath.linspace(0, 1, 201))
        pi_t = mpmath.mpf(pi_t)
        below = mpmath.quad(integrand, [p for p in grid if p < pi_t] + [pi_t])
        above = mpmath.quad(integrand, [pi_t] + [p for p in grid if p > pi_t])
        return float(below / (below + above))


class TestTypes:
    def test_plan_bounds(self):
        TestPlan(10, -1)
        TestPlan(10, 10)
        with pytest.raises(DomainError):
            TestPlan(10, 11)
        with pytest.raises(DomainError):
            TestPlan(10, -2)

    def test_mixture_weights(self):
        with pytest.raises(DomainError):
            MixturePrior((BetaPrior(1, 1), BetaPrior(2, 2)), (0.5, 0.6))
        with pytest.raises(DomainError):
            MixturePrior((), ())
        with pytest.raises(DomainError):
            BetaPrior(0, 1)

    def test_design_prior_positive(self):
        with pytest.raises(DomainError):
            DesignPrior(78, 2, -1, 1)

    def test_historical_rejects_x_above_n(self, tmp_path):
        with pytest.raises(IncoherenceError):
            HistoricalData([5], [6])
        f = tmp_path / "h.csv"
        f.write_text("n,x\n10,2\n4,5\n")
        with pytest.raises(IncoherenceError):
            HistoricalData.from_csv(f)
        f.write_text("n,x\n10,2\n4,1\n")
        h = HistoricalData.from_csv(f)
        np.testing.assert_array_equal(h.n, [10, 4])
        np.testing.assert_array_equal(h.x, [2, 1])


class TestCutoffExact:
    def test_examples(self):
        assert bd.cutoff_exact(40, 0.96, 0.05) == -1
        assert bd.cutoff_exact(1, 0.5, 0.6) == 0

    def test_against_tail_summation(self):
        assert bd.cutoff_exact(227, 0.96, 0.05) == _tail_sum_cutoff(227, 0.96, 0.05)
        rng = np.random.default_rng(5)
        for _ in range(40):
            n = int(rng.integers(1, 400))
            pi_t = float(rng.uniform(0.5, 0.99))
            alpha = float(rng.uniform(0.01, 0.3))
            assert bd.cutoff_exact(n, pi_t, alpha) == _tail_sum_cutoff(n, pi_t, alpha)

    def test_domain(self):
        with pytest.raises(DomainError):
            bd.cutoff_exact(0, 0.9, 0.05)
        with pytest.raises(DomainError):
            bd.cutoff_exact(10, 1.0, 0.05)


class TestCutoffNormal:
    def test_examples(self):
        assert bd.cutoff_normal(100, 0.5, 0.05) == 41
        assert bd.cutoff_normal(1, 0.96, 0.5) == 0

    def test_direct_formula(self):
        n, pi_t, alpha = 100, 0.5, 0.05
        z = sps.norm.ppf(alpha)
        expected = max(c for c in range(n + 1) if (c / n - pi_t) / math.sqrt(pi_t * (1 - pi_t) / n) < z)
        assert bd.cutoff_normal(n, pi_t, alpha) == expected

    def test_failure_form_tracks_exact(self):
        exact = bd.cutoff_exact(227, 0.96, 0.05)
        assert abs(bd.cutoff_normal(227, 0.96, 0.05, statistic="failures") - exact) <= 1
        assert NormalApprox(0.96, 0.05, "failures").cutoff(227) == bd.cutoff_normal(227, 0.96, 0.05, "failures")

    def test_literal_form_at_reliability_scale(self):
        # failures compared with the survival target: c/n < 0.96 - 1.645 * 0.013
        c = bd.cutoff_normal(227, 0.96, 0.05)
        z = (np.arange(228) / 227 - 0.96) / math.sqrt(0.96 * 0.04 / 227)
        assert c == int(np.nonzero(z < sps.norm.ppf(0.05))[0][-1]) == 213

    def test_symmetric_target_forms_agree(self):
        for n in (10, 57, 100, 333):
            assert bd.cutoff_normal(n, 0.5, 0.05) == bd.cutoff_normal(n, 0.5, 0.05, "failures")


class TestPosteriorFailProb:
    def test_examples(self):
        assert bd.posterior_fail_prob(10, 3, BetaPrior(2, 3), 1.0) == pytest.approx(1.0)
        assert bd.posterior_fail_prob(0, 0, SCEPTICAL, 0.96) == pytest.approx(0.9668, abs=1e-4)
        assert bd.posterior_fail_prob(0, 0, SCEPTICAL, 0.95) == pytest.approx(0.95, abs=2e-4)

    def test_quadrature_oracle(self):
        val = bd.posterior_fail_prob(50, 1, BetaPrior(1, 1), 0.9)
        with mpmath.workdps(30):
            f = lambda p: p**49 * (1 - p)
            ref = mpmath.quad(f, [0, 0.9]) / mpmath.quad(f, [0, 0.9, 1])
        assert val == pytest.approx(float(ref), abs=1e-12)

    def test_nondecreasing_in_c(self):
        for n in range(1, 201):
            p = bd.posterior_fail_prob(n, np.arange(n + 1), SCEPTICAL, 0.96)
            assert np.all(np.diff(p) >= -1e-15)


class TestMixture:
    def test_update_no_data(self):
        out = bd.mixture_posterior_update(MIX, 0, 0)
        np.testing.assert_allclose(out.weights, MIX.weights, rtol=1e-14)
        assert out.components == MIX.components

    def test_update_single_component(self):
        single = MixturePrior((BetaPrior(3, 4),), (1.0,))
        out = bd.mixture_posterior_update(single, 20, 13)
        assert out.weights == (1.0,)
        assert out.components[0] == BetaPrior(16, 11)

    def test_update_evidence_ratio(self):
        out = bd.mixture_posterior_update(MIX, 10, 9)
        lw = [
            math.log(w) + float(mpmath.log(mpmath.beta(c.a + 9, c.b + 1) / mpmath.beta(c.a, c.b)))
            for c, w in zip(MIX.components, MIX.weights)
        ]
        ref = np.exp(np.array(lw) - max(lw))
        np.testing.assert_allclose(out.weights, ref / ref.sum(), rtol=1e-12)

    def test_reduces_to_single_beta(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            a, b = rng.uniform(0.5, 50, 2)
            n = int(rng.integers(1, 300))
            c = int(rng.integers(0, n + 1))
            pi_t = float(rng.uniform(0.5, 0.99))
            single = MixturePrior((BetaPrior(a, b),), (1.0,))
            assert bd.posterior_fail_prob_mixture(n, c, single, pi_t) == pytest.approx(
                bd.posterior_fail_prob(n, c, BetaPrior(a, b), pi_t), abs=1e-13
            )

    @pytest.mark.parametrize("n,c", [(0, 0), (10, 1), (50, 0), (222, 3), (222, 9), (400, 20)])
    def test_quadrature_oracle(self, n, c):
        got = bd.posterior_fail_prob_mixture(n, c, MIX, 0.96)
        assert got == pytest.approx(_mixture_quadrature(MIX, n, c, 0.96), abs=1e-9)

    def test_pi_t_one(self):
        assert bd.posterior_fail_prob_mixture(30, 2, MIX, 1.0) == pytest.approx(1.0)

    def test_failure_count_weights_differ(self):
        a = bd.posterior_fail_prob_mixture(222, 5, MIX, 0.96)
        b = bd.posterior_fail_prob_mixture(222, 5, MIX, 0.96, weight_count="failures")
        assert a != b
        with pytest.raises(DomainError):
            bd.posterior_fail_prob_mixture(222, 5, MIX, 0.96, weight_count="both")


class TestCutoffBayes:
    def test_delta_one(self):
        assert bd.cutoff_bayes(37, SCEPTICAL, 0.96, 1.0) == 37

    def test_sceptical_nondecreasing(self):
        cs = [bd.cutoff_bayes(n, SCEPTICAL, 0.96, 0.05) for n in range(1, 501)]
        assert np.all(np.diff(cs) >= 0)
        assert cs[0] == -1

    def test_mixture_at_reference_n(self):
        c = bd.cutoff_bayes(222, MIX, 0.96, 0.05)
        assert _mixture_quadrature(MIX, 222, c, 0.96) <= 0.05
        assert c == 222 or _mixture_quadrature(MIX, 222, c + 1, 0.96) > 0.05

    def test_inclusive_boundary(self):
        n = 60
        p = bd.posterior_fail_prob(n, np.arange(n + 1), SCEPTICAL, 0.96)
        c = 4
        assert bd.cutoff_bayes(n, SCEPTICAL, 0.96, float(p[c])) >= c


class TestAssurance:
    def test_certain_and_impossible(self):
        pi = DESIGN.sample_pi(RandomStream(0), 1000)
        assert bd.assurance_from_cutoff(50, 50, pi).value == 1.0
        assert bd.assurance_from_cutoff(50, -1, pi).value == 0.0
        est = bd.assurance_prior(25, BayesThreshold(SCEPTICAL, 0.96, 1.0), DESIGN, 2000)
        assert est.value == 1.0

    def test_point_mass_exact(self):
        pi = np.full(10, 0.93)
        for n, c in [(10, 0), (50, 3), (200, 15)]:
            assert bd.assurance_from_cutoff(n, c, pi).value == pytest.approx(
                sps.binom.cdf(c, n, 0.07), rel=1e-12
            )

    def test_perfect_reliability(self):
        assert bd.assurance_posterior(40, ExactTest(0.5, 0.05), np.ones(100)).value == 1.0

    def test_beta_binomial_oracle(self):
        rng = np.random.default_rng(17)
        root = RandomStream(3)
        hits = 0
        for i in range(100):
            a, b = rng.uniform(1, 60, 2)
            n = int(rng.integers(1, 200))
            # c from the predictive law keeps the pass probability away from 0 and 1
            c = min(int(sps.betabinom(n, b, a).rvs(random_state=rng)), n - 1)
            pi = BetaPrior(a, b)
            draws = sps.beta(a, b).rvs(20_000, random_state=root.child(i).generator())
            est = bd.assurance_from_cutoff(n, c, draws)
            ref = _beta_binomial_pass(n, c, pi.a, pi.b)
            hits += abs(est.value - ref) <= 3 * max(est.mc_std_error, 1e-12)
        assert hits >= 97

    def test_standard_error(self):
        pi = DESIGN.sample_pi(RandomStream(1), 50_000)
        est = bd.assurance_from_cutoff(227, 5, pi)
        vals = sps.binom.cdf(5, 227, 1 - pi)
        assert est.mc_std_error == pytest.approx(vals.std(ddof=1) / math.sqrt(pi.size), rel=1e-10)

    def test_sawtooth(self):
        pi = DESIGN.sample_pi(RandomStream(2), 20_000)
        rule = ExactTest(0.96, 0.05)
        curve = bd.assurance_curve(rule, range(1, 501), pi)
        for (n0, c0, e0), (n1, c1, e1) in zip(curve, curve[1:]):
            if c0 == c1:
                assert e1.value <= e0.value + 1e-15

    def test_reproducible(self):
        a = bd.assurance_prior(227, ExactTest(0.96, 0.05), DESIGN, 5000, RandomStream(8))
        b = bd.assurance_prior(227, ExactTest(0.96, 0.05), DESIGN, 5000, RandomStream(8))
        assert a == b


class TestFindMinN:
    def test_gamma_zero(self):
        pi = DESIGN.sample_pi(RandomStream(0), 1000)
        res = bd.find_min_n(ExactTest(0.96, 0.05), pi, 0.0, n_max=100)
        assert res.reached and res.n == 1

    def test_matches_full_scan(self):
        pi = DESIGN.sample_pi(RandomStream(4), 20_000)
        rule = BayesThreshold(SCEPTICAL, 0.96, 0.05)
        res = bd.find_min_n(rule, pi, 0.4, n_max=600)
        curve = bd.assurance_curve(rule, range(1, 601), pi)
        first = next(n for n, _, e in curve if e.value >= 0.4)
        assert res.reached and res.n == first

    def test_unreachable(self):
        pi = DESIGN.sample_pi(RandomStream(4), 20_000)
        res = bd.find_min_n(ExactTest(0.96, 0.05), pi, 0.9, n_max=2000)
        assert not res.reached and res.n is None
        assert 0.6 < res.best.value < 0.9

    def test_domain(self):
        with pytest.raises(DomainError):
            bd.find_min_n(ExactTest(0.96, 0.05), np.ones(3), 1.0)


class TestScenarios:
    def setup_method(self):
        self.pi = DESIGN.sample_pi(RandomStream(6), 20_000)

    def test_single_scenario(self):
        res = bd.assurance_cutoff_distribution(200, [(1.0, SCEPTICAL)], 0.96, 0.05, self.pi)
        ref = bd.assurance_posterior(200, BayesThreshold(SCEPTICAL, 0.96, 0.05), self.pi)
        assert res.estimate.value == pytest.approx(ref.value, abs=1e-14)

    def test_identical_scenarios(self):
        one = bd.assurance_cutoff_distribution(200, [(1.0, MIX)], 0.96, 0.05, self.pi)
        two = bd.assurance_cutoff_distribution(200, [(0.3, MIX), (0.7, MIX)], 0.96, 0.05, self.pi)
        assert two.estimate.value == pytest.approx(one.estimate.value, abs=1e-14)

    def test_tail_resummation(self):
        scen = [(0.2, SCEPTICAL), (0.5, MIX), (0.3, BetaPrior(30, 1))]
        res = bd.assurance_cutoff_distribution(300, scen, 0.96, 0.05, self.pi)
        resum = float(np.sum(res.tail_weights * res.s))
        assert res.estimate.value == pytest.approx(resum, abs=1e-10)
        # lower cumulative weights disagree whenever the cut-offs differ
        lower = np.cumsum(np.r_[np.zeros(max(res.distribution.lower, 0)), res.distribution.masses])[: res.s.size]
        if len(set(res.cutoffs)) > 1:
            assert abs(float(np.sum(lower * res.s)) - res.estimate.value) > 1e-6

    def test_weights_checked(self):
        with pytest.raises(DomainError):
            bd.assurance_cutoff_distribution(10, [(0.5, MIX)], 0.96, 0.05, self.pi)


class TestDesignPosterior:
    def test_no_information_matches_prior(self):
        post = bd.design_posterior_draws(DESIGN, HistoricalData([0], [0]), stream=RandomStream(1))
        prior = DESIGN.sample_pi(RandomStream(2), 2_000)
        # thin to near-independent draws before the two-sample test
        assert sps.ks_2samp(post.pi[::5], prior).pvalue > 1e-3
        assert sps.ks_2samp(post.p[::20], sps.beta(78, 2).rvs(500, random_state=3)).pvalue > 1e-3

    def test_initialization_error(self):
        from rdt_assurance.errors import InitializationError

        huge = DesignPrior(78, 2, 1e10, 1e-300)  # prior mean of m overflows
        with pytest.raises((InitializationError, DomainError)):
            bd.design_posterior_draws(huge, HistoricalData([10**9], [0]), MCMCSettings(20, 10))

    def test_recovery_and_tuning(self):
        rng = np.random.default_rng(63)
        pis = rng.beta(150 * 0.97, 150 * 0.03, 63)
        n = rng.integers(50, 400, 63)
        x = rng.binomial(n, 1 - pis)
        post = bd.design_posterior_draws(DESIGN, HistoricalData(n, x), stream=RandomStream(3))
        assert post.p.size == MCMCSettings().n_kept
        assert post.p.mean() == pytest.approx(0.97, abs=0.01)
        assert 0.15 <= post.acceptance_rate <= 0.5

    def test_posterior_above_target_raises_assurance(self):
        rng = np.random.default_rng(64)
        pis = rng.beta(400 * 0.99, 400 * 0.01, 63)
        n = rng.integers(50, 400, 63)
        x = rng.binomial(n, 1 - pis)
        post = bd.design_posterior_draws(DESIGN, HistoricalData(n, x), stream=RandomStream(5))
        rule = ExactTest(0.96, 0.05)
        prior_pi = DESIGN.sample_pi(RandomStream(4), post.pi.size)
        assert bd.assurance_posterior(300, rule, post.pi).value > bd.assurance_posterior(300, rule, prior_pi).value
