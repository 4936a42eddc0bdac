import math

import numpy as np
import pytest
from scipy import special, stats as sps

from rdt_assurance import elicitation as el
from rdt_assurance.elicitation import QuartileJudgement
from rdt_assurance.errors import DomainError, IncoherenceError, InfeasibleError

Z75 = sps.norm.ppf(0.75)


def _ratio_judgement(a, b):
    """Ratio quartiles implied by a gamma(a, b) prior on the Weibull shape."""
    q = [special.gammaincinv(a, p) / b for p in (0.25, 0.5, 0.75)]
    return QuartileJudgement(*(float(el.ratio_from_shape(x)) for x in q))


def _t_values(a, b, q1=0.6, q2=0.8):
    scale = math.sqrt(2 * b / a)
    return sps.t.ppf(q1, 2 * a) * scale, sps.t.ppf(q2, 2 * a) * scale


def _regression_judgements(mu0, mu1, s00, s11, s01, v, stresses):
    out = {}
    for s in stresses:
        m = -(mu0 + mu1 * s)
        sd = math.sqrt(s00 + 2 * s * s01 + s * s * s11 + v)
        out[s] = QuartileJudgement(math.exp(m - Z75 * sd), math.exp(m), math.exp(m + Z75 * sd))
    return out


class TestShapeRatio:
    def test_ratio_map_increasing(self):
        r = np.linspace(0.05, 0.95, 50)
        assert np.all(np.diff(el.shape_from_ratio(r)) > 0)

    def test_round_trip_map(self):
        for beta in (0.3, 1.0, 2.7, 15.0):
            assert el.shape_from_ratio(el.ratio_from_shape(beta)) == pytest.approx(beta, rel=1e-12)

    def test_unit_shape(self):
        base = math.log(2 / 3) / math.log(1 / 3)
        assert el.shape_from_ratio(base) == pytest.approx(1.0, rel=1e-14)

    def test_point_judgement_incoherent(self):
        base = math.log(2 / 3) / math.log(1 / 3)
        with pytest.raises(IncoherenceError):
            el.beta_shape_prior_from_ratio(QuartileJudgement(base, base, base))

    def test_ratio_at_least_one(self):
        with pytest.raises(IncoherenceError):
            el.beta_shape_prior_from_ratio(QuartileJudgement(0.5, 0.8, 1.2))

    def test_reference_gamma(self):
        fit = el.beta_shape_prior_from_ratio(_ratio_judgement(20, 13))
        assert fit.shape == pytest.approx(20, abs=1e-6)
        assert fit.rate == pytest.approx(13, abs=1e-6)
        assert fit.diagnostics == ()

    def test_random_round_trips(self):
        rng = np.random.default_rng(21)
        for _ in range(100):
            a = float(np.exp(rng.uniform(np.log(0.5), np.log(200))))
            b = float(np.exp(rng.uniform(np.log(0.1), np.log(50))))
            fit = el.beta_shape_prior_from_ratio(_ratio_judgement(a, b))
            assert fit.shape == pytest.approx(a, rel=1e-6)
            assert fit.rate == pytest.approx(b, rel=1e-6)

    def test_median_diagnostic(self):
        j = _ratio_judgement(20, 13)
        skewed = QuartileJudgement(j.lower, 0.5 * (j.lower + j.median), j.upper)
        assert el.beta_shape_prior_from_ratio(skewed).diagnostics


class TestVariance:
    def test_forward(self):
        q3 = math.exp(Z75 * 1.0)
        assert q3 == pytest.approx(1.963, abs=1e-3)
        assert el.v_eps_from_ratio(q3).v_eps == pytest.approx(0.5, abs=1e-9)

    def test_tiny_spread(self):
        assert el.v_eps_from_ratio(1 + 1e-9).v_eps < 1e-16

    def test_median_warning(self):
        assert el.v_eps_from_ratio(2.0, median=1.1).diagnostics
        assert el.v_eps_from_ratio(2.0).diagnostics == ()

    def test_incoherent(self):
        with pytest.raises(IncoherenceError):
            el.v_eps_from_ratio(1.0)

    def test_random_round_trips(self):
        rng = np.random.default_rng(22)
        for v in np.exp(rng.uniform(np.log(1e-4), np.log(10), 100)):
            q3 = math.exp(Z75 * math.sqrt(2 * v))
            assert el.v_eps_from_ratio(q3).v_eps == pytest.approx(v, rel=1e-9)


class TestStudentT:
    def test_reference(self):
        q1, q2 = _t_values(2, 2)
        fit = el.t_hypers_from_quantiles(0.6, q1, 0.8, q2)
        assert fit.a_eps == pytest.approx(2, abs=1e-6)
        assert fit.b_eps == pytest.approx(2, abs=1e-6)
        assert not fit.effectively_normal

    def test_normal_limit(self):
        z1, z2 = sps.norm.ppf(0.6), sps.norm.ppf(0.8)
        fit = el.t_hypers_from_quantiles(0.6, 0.3 * z1, 0.8, 0.3 * z2)
        assert fit.effectively_normal and fit.a_eps == 500.0
        assert fit.diagnostics

    def test_random_round_trips(self):
        rng = np.random.default_rng(23)
        for _ in range(100):
            a = float(np.exp(rng.uniform(np.log(0.6), np.log(100))))
            b = float(np.exp(rng.uniform(np.log(0.05), np.log(20))))
            q1, q2 = _t_values(a, b)
            fit = el.t_hypers_from_quantiles(0.6, q1, 0.8, q2)
            assert fit.a_eps == pytest.approx(a, rel=1e-6)
            assert fit.b_eps == pytest.approx(b, rel=1e-6)

    def test_other_probabilities(self):
        q1, q2 = _t_values(3.5, 0.7, 0.3, 0.9)
        fit = el.t_hypers_from_quantiles(0.3, q1, 0.9, q2)
        assert (fit.a_eps, fit.b_eps) == (pytest.approx(3.5, rel=1e-6), pytest.approx(0.7, rel=1e-6))

    @pytest.mark.parametrize("q1,q2", [(0.5, 0.8), (0.6, 0.6), (0.2, 0.8)])
    def test_inadmissible_probabilities(self, q1, q2):
        with pytest.raises(DomainError):
            el.t_hypers_from_quantiles(q1, 0.1, q2, 0.5)

    def test_infeasible(self):
        # a ratio heavier-tailed than t on 1 degree of freedom has no root in range
        with pytest.raises(InfeasibleError):
            el.t_hypers_from_quantiles(0.6, 0.001, 0.8, 5.0)

    def test_wrong_sign(self):
        with pytest.raises(IncoherenceError):
            el.t_hypers_from_quantiles(0.6, -0.1, 0.8, 0.5)


class TestRegression:
    def test_reference(self):
        j = _regression_judgements(-40, 1, 1, 0.01, 0, 0.3, (0.0, 25.5, 29.7))
        fit = el.regression_hypers(j, 0.3)
        np.testing.assert_allclose(
            [fit.mu0, fit.mu1, fit.s00, fit.s11, fit.s01], [-40, 1, 1, 0.01, 0], atol=1e-9
        )
        assert fit.diagnostics == ()

    def test_boundary_flag(self):
        j = _regression_judgements(-5, 0.5, 0.0, 0.02, 0.0, 0.2, (0.0, 1.0, 3.0))
        fit = el.regression_hypers(j, 0.2)
        assert fit.s00 == 0.0 and any("boundary" in d for d in fit.diagnostics)

    def test_not_positive_definite(self):
        # variance shrinking with stress faster than any PSD covariance allows
        j = {
            0.0: QuartileJudgement(math.exp(-Z75 * 2), 1.0, math.exp(Z75 * 2)),
            1.0: QuartileJudgement(math.exp(-1 - Z75 * 0.1), math.exp(-1), math.exp(-1 + Z75 * 0.1)),
            2.0: QuartileJudgement(math.exp(-2 - Z75 * 3), math.exp(-2), math.exp(-2 + Z75 * 3)),
        }
        with pytest.raises(IncoherenceError, match="eigenvalue"):
            el.regression_hypers(j, 0.01)

    def test_needs_zero_stress(self):
        j = _regression_judgements(-5, 0.5, 1, 0.02, 0.0, 0.2, (1.0, 2.0, 3.0))
        with pytest.raises(DomainError):
            el.regression_hypers(j, 0.2)

    def test_random_round_trips(self):
        rng = np.random.default_rng(24)
        for _ in range(100):
            s00, s11 = rng.uniform(0.05, 3), rng.uniform(1e-3, 0.5)
            s01 = rng.uniform(-0.9, 0.9) * math.sqrt(s00 * s11)
            mu0, mu1 = rng.normal(-10, 5), rng.normal(0.5, 0.5)
            v = rng.uniform(0, 1)
            s1, s2 = sorted(rng.uniform(0.5, 5, 2))
            if s2 - s1 < 0.1:
                s2 += 0.5
            j = _regression_judgements(mu0, mu1, s00, s11, s01, v, (0.0, s1, s2))
            fit = el.regression_hypers(j, v)
            np.testing.assert_allclose(
                [fit.mu0, fit.mu1, fit.s00, fit.s11, fit.s01], [mu0, mu1, s00, s11, s01], atol=1e-6
            )


class TestSceptical:
    def test_reference_target(self):
        prior = el.sceptical_beta(0.96, 0.05, 2)
        assert 1 - special.betainc(prior.a, 2, 0.96) == pytest.approx(0.05, abs=1e-9)
        # the quoted 6.45 is the solution at pi_T = 0.95
        assert el.sceptical_beta(0.95, 0.05, 2).a == pytest.approx(6.45, abs=0.01)

    def test_closed_form_b_one(self):
        assert el.sceptical_beta(0.9, 0.5, 1).a == pytest.approx(math.log(0.5) / math.log(0.9), rel=1e-10)

    def test_random_residuals(self):
        rng = np.random.default_rng(25)
        for _ in range(100):
            pi_t, delta, b = rng.uniform(0.5, 0.995), rng.uniform(0.01, 0.5), rng.uniform(0.5, 5)
            prior = el.sceptical_beta(pi_t, delta, b)
            assert 1 - special.betainc(prior.a, b, pi_t) == pytest.approx(delta, abs=1e-9)

    def test_domain(self):
        with pytest.raises(DomainError):
            el.sceptical_beta(1.0, 0.05)


class TestBinomialDesign:
    def test_reference(self):
        bp, g = sps.beta(78, 2), sps.gamma(200, scale=1.0)
        fit = el.binomial_design_hypers(bp.mean(), (bp.ppf(0.25), bp.ppf(0.75)), g.mean(), (g.ppf(0.25), g.ppf(0.75)))
        np.testing.assert_allclose([fit.prior.a_p, fit.prior.b_p, fit.prior.a_m, fit.prior.b_m], [78, 2, 200, 1], rtol=1e-6)
        assert fit.diagnostics == ()

    def test_symmetric(self):
        bp = sps.beta(7, 7)
        fit = el.binomial_design_hypers(0.5, (bp.ppf(0.25), bp.ppf(0.75)), 10, (8, 12))
        assert fit.prior.a_p == pytest.approx(fit.prior.b_p, rel=1e-8)

    def test_random_round_trips(self):
        rng = np.random.default_rng(26)
        for _ in range(100):
            ap, bp_ = np.exp(rng.uniform(np.log(0.8), np.log(200), 2))
            am, bm = np.exp(rng.uniform(np.log(0.8), np.log(300))), np.exp(rng.uniform(np.log(0.01), np.log(10)))
            B, G = sps.beta(ap, bp_), sps.gamma(am, scale=1 / bm)
            fit = el.binomial_design_hypers(B.mean(), (B.ppf(0.25), B.ppf(0.75)), G.mean(), (G.ppf(0.25), G.ppf(0.75)))
            np.testing.assert_allclose(
                [fit.prior.a_p, fit.prior.b_p, fit.prior.a_m, fit.prior.b_m], [ap, bp_, am, bm], rtol=1e-6
            )

    def test_inexact_judgement_reported(self):
        fit = el.binomial_design_hypers(0.9, (0.95, 0.97), 200, (190, 210))
        assert fit.diagnostics

    def test_incoherent(self):
        with pytest.raises(IncoherenceError):
            el.binomial_design_hypers(0.9, (0.97, 0.95), 200, (190, 210))
