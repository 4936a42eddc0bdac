import numpy as np
import pytest
from scipy import integrate, stats as sps

from rdt_assurance import risk
from rdt_assurance.binomial import BetaPrior, DesignPrior, TestPlan, cutoff_bayes
from rdt_assurance.errors import DomainError
from rdt_assurance.risk import RiskLevels
from rdt_assurance.stats import RandomStream

LEVELS = RiskLevels(0.96, 0.90, 0.1, 0.1)


def _quad_posterior_risks(n, c, a, b, levels):
    """Posterior risks for pi ~ beta(a, b) by adaptive quadrature of the integral ratios."""
    dens = sps.beta(a, b).pdf
    F = lambda p: sps.binom.cdf(c, n, 1 - p)
    kw = dict(limit=400, epsabs=1e-13, epsrel=1e-11, points=[levels.pi_1, levels.pi_0])

    def q(f, lo, hi):
        pts = [p for p in kw["points"] if lo < p < hi]
        return integrate.quad(f, lo, hi, **{**kw, "points": pts or None})[0]

    fail_all = q(lambda p: (1 - F(p)) * dens(p), 0, 1)
    fail_good = q(lambda p: (1 - F(p)) * dens(p), levels.pi_0, 1)
    pass_all = q(lambda p: F(p) * dens(p), 0, 1)
    pass_bad = q(lambda p: F(p) * dens(p), 0, levels.pi_1)
    return fail_good / fail_all, pass_bad / pass_all


def _brute_force_plan(levels, pi, n_max):
    """First (n, c) in lexicographic order meeting both bounds; plain per-plan evaluation."""
    for n in range(1, n_max + 1):
        F = sps.binom.cdf(np.arange(n + 1)[:, None], n, 1 - pi[None, :])
        for c in range(n + 1):
            ok = F[c]
            fail = sps.binom.sf(c, n, 1 - pi)
            if ok.mean() < 1e-6 or fail.mean() < 1e-6:
                continue
            prod = np.sum(fail * (pi >= levels.pi_0)) / np.sum(fail)
            cons = np.sum(ok * (pi <= levels.pi_1)) / np.sum(ok)
            if prod <= levels.alpha_max and cons <= levels.beta_max:
                return n, c
    return None


class TestLevels:
    def test_ordering(self):
        with pytest.raises(DomainError):
            RiskLevels(0.9, 0.95)
        with pytest.raises(DomainError):
            RiskLevels(0.96, 0.9, 0.0, 0.1)


class TestClassical:
    def test_extremes(self):
        assert risk.classical_risks(TestPlan(20, 20), LEVELS) == risk.Risks(0.0, 1.0)
        assert risk.classical_risks(TestPlan(20, -1), LEVELS) == risk.Risks(1.0, 0.0)

    def test_enumeration(self):
        r = risk.classical_risks(TestPlan(20, 1), LEVELS)
        pass0 = 0.96**20 + 20 * 0.04 * 0.96**19
        pass1 = 0.90**20 + 20 * 0.10 * 0.90**19
        assert r.producer == pytest.approx(1 - pass0, abs=1e-14)
        assert r.consumer == pytest.approx(pass1, abs=1e-14)

    def test_producer_complements_pass(self):
        for n in range(1, 60):
            for c in range(-1, n + 1):
                r = risk.classical_risks(TestPlan(n, c), LEVELS)
                pass0 = sps.binom.cdf(c, n, 0.04) if c >= 0 else 0.0
                assert r.producer + pass0 == pytest.approx(1.0, abs=1e-12)


class TestAverage:
    def test_point_mass_at_pi0(self):
        plan = TestPlan(30, 2)
        r = risk.average_risks_from_draws(plan, RiskLevels(0.96, 0.96), np.full(10, 0.96))
        assert r.producer == pytest.approx(risk.classical_risks(plan, LEVELS).producer, abs=1e-14)

    def test_uniform_closed_form(self):
        levels = RiskLevels(0.7, 0.3)
        r = risk.average_risks(TestPlan(1, 0), levels, lambda g, n: g.random(n), 400_000, RandomStream(1))
        assert r.producer == pytest.approx((1 - 0.7) / 2, abs=4 * r.producer_se)

    def test_full_consumer_set(self):
        pi = DesignPrior(78, 2, 200, 1).sample_pi(RandomStream(2), 50_000)
        pi = np.minimum(pi, 1 - 1e-12)
        levels = RiskLevels(0.999999999999, 0.999999999999)
        r = risk.average_risks_from_draws(TestPlan(50, 2), levels, pi)
        assert r.consumer == pytest.approx(sps.binom.cdf(2, 50, 1 - pi).mean(), abs=1e-12)

    def test_empty_conditioning(self):
        with pytest.raises(risk.ConditioningMassError):
            risk.average_risks_from_draws(TestPlan(10, 1), LEVELS, np.full(100, 0.93))


class TestPosterior:
    def test_all_below_pi0(self):
        pi = np.linspace(0.5, 0.95, 1000)
        assert risk.posterior_risks(TestPlan(40, 2), LEVELS, pi).producer == 0.0

    def test_certain_pass(self):
        pi = sps.beta(30, 2).rvs(10_000, random_state=1)
        with pytest.raises(risk.DegeneratePlanError):
            risk.posterior_risks(TestPlan(40, 40), LEVELS, pi)
        # consumer of a sure pass is the prior mass below pi_1
        r = risk.posterior_risks_conjugate(TestPlan(40, 39), LEVELS, BetaPrior(30, 2))
        assert 0 <= r.consumer <= sps.beta(30, 2).cdf(0.9) + 1e-12

    def test_point_mass_indicators(self):
        plan = TestPlan(25, 1)
        assert risk.posterior_risks(plan, LEVELS, np.full(5, 0.97)) == risk.Risks(1.0, 0.0, 0.0, 0.0)
        assert risk.posterior_risks(plan, LEVELS, np.full(5, 0.85)) == risk.Risks(0.0, 1.0, 0.0, 0.0)

    def test_conjugate_matches_quadrature(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            a, b = rng.uniform(5, 80), rng.uniform(0.5, 5)
            n = int(rng.integers(5, 200))
            c = int(rng.integers(0, max(1, n // 10)))
            try:
                conj = risk.posterior_risks_conjugate(TestPlan(n, c), LEVELS, BetaPrior(a, b))
            except risk.DegeneratePlanError:
                continue
            ref = _quad_posterior_risks(n, c, a, b, LEVELS)
            np.testing.assert_allclose([conj.producer, conj.consumer], ref, atol=1e-8)


class TestPlanSearch:
    def test_vacuous(self):
        pi = sps.beta(95, 5).rvs(5000, random_state=3)
        res = risk.find_min_plan(RiskLevels(0.96, 0.9, 1.0, 1.0), pi, n_max=10)
        assert res.feasible and res.plan == TestPlan(1, 0)

    def test_indifference_mass_is_vacuous(self):
        # no mass outside [pi_1, pi_0] makes both posterior risks exactly zero
        pi = np.random.default_rng(0).uniform(0.91, 0.95, 5000)
        res = risk.find_min_plan(RiskLevels(0.96, 0.90, 0.01, 0.01), pi, n_max=50)
        assert res.feasible and res.plan == TestPlan(1, 0)

    def test_infeasible(self):
        rng = np.random.default_rng(0)
        pi = np.where(rng.random(5000) < 0.5, 0.97, 0.89)
        res = risk.find_min_plan(RiskLevels(0.96, 0.90, 0.01, 0.01), pi, n_max=20)
        assert not res.feasible and res.plan is None
        assert res.best_plan is not None and res.best_margin > 0

    def test_brute_force_fixture(self):
        pi = sps.beta(95, 5).rvs(5000, random_state=4)
        res = risk.find_min_plan(LEVELS, pi, n_max=500)
        ref = _brute_force_plan(LEVELS, pi, 500)
        assert res.feasible and (res.plan.n, res.plan.c) == ref
        # no seed overfitting: fresh draws keep both risks within 3 combined SE of the bounds
        r0 = risk.posterior_risks(res.plan, LEVELS, pi)
        fresh = sps.beta(95, 5).rvs(200_000, random_state=5)
        r = risk.posterior_risks(res.plan, LEVELS, fresh)
        assert r.producer <= LEVELS.alpha_max + 3 * np.hypot(r.producer_se, r0.producer_se)
        assert r.consumer <= LEVELS.beta_max + 3 * np.hypot(r.consumer_se, r0.consumer_se)

    def test_monotone_in_c(self):
        pi = sps.beta(95, 5).rvs(4000, random_state=6)
        for n in range(1, 201, 7):
            prod, cons = risk._risk_table(n, LEVELS, pi, 0.0)
            assert np.all(np.diff(prod[np.isfinite(prod)]) <= 1e-12)
            assert np.all(np.diff(cons[np.isfinite(cons)]) >= -1e-12)


class TestPerY:
    def test_alpha_one(self):
        pi = sps.beta(60, 3).rvs(3000, random_state=7)
        c_prod, _ = risk.per_y_cutoff_bounds(40, RiskLevels(0.96, 0.9, 1.0, 0.05), pi)
        assert c_prod == 40

    def test_conjugate_form(self):
        a, b, n = 60.0, 3.0, 40
        pi = sps.beta(a, b).rvs(100_000, random_state=8)
        above, below = risk.per_y_posteriors(n, LEVELS, pi)
        for y in range(4):
            post = sps.beta(a + n - y, b + y)
            assert above[y] == pytest.approx(post.sf(0.96), abs=0.01)
            assert below[y] == pytest.approx(post.cdf(0.90), abs=0.01)

    def test_brackets_bayes_cutoff(self):
        # with pi_0 = pi_1 = pi_T the consumer bound reproduces the Bayes cut-off
        a, b, pi_t, delta = 6.45, 2.0, 0.96, 0.05
        pi = sps.beta(a, b).rvs(100_000, random_state=9)
        for n in (100, 250):
            _, c_cons = risk.per_y_cutoff_bounds(n, RiskLevels(pi_t, pi_t, 1 - delta, delta), pi)
            assert abs(c_cons - cutoff_bayes(n, BetaPrior(a, b), pi_t, delta)) <= 1
