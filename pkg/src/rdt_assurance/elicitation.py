"""Turn expert quantile judgements into prior hyper-parameters.

Each function inverts a forward quantile map: given the numbers an engineer
can state (quartiles of observable lifetimes or ratios, a mean reliability),
it returns hyper-parameters whose implied quantiles reproduce them. Judgements
are never adjusted silently; anything that does not fit is reported in the
``diagnostics`` of the result, and impossible judgements raise
:class:`~rdt_assurance.errors.IncoherenceError`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy import optimize, special, stats as sps

from .binomial import BetaPrior, DesignPrior
from .errors import DomainError, IncoherenceError, InfeasibleError

# tau_{2/3} / tau_{1/3} = LOG_RATIO_BASE ** (1 / shape)
LOG_RATIO_BASE = math.log(2.0 / 3.0) / math.log(1.0 / 3.0)
Z75 = float(special.ndtri(0.75))


@dataclass(frozen=True)
class QuartileJudgement:
    lower: float
    median: float
    upper: float

    def __post_init__(self):
        if not self.lower < self.median < self.upper:
            raise IncoherenceError(
                f"quartiles must satisfy lower < median < upper, got "
                f"({self.lower}, {self.median}, {self.upper})"
            )


@dataclass(frozen=True)
class GammaFit:
    shape: float
    rate: float
    implied_median: float
    elicited_median: float
    diagnostics: tuple[str, ...] = ()


@dataclass(frozen=True)
class VarianceFit:
    v_eps: float
    diagnostics: tuple[str, ...] = ()


@dataclass(frozen=True)
class TFit:
    a_eps: float
    b_eps: float
    effectively_normal: bool = False
    diagnostics: tuple[str, ...] = ()


@dataclass(frozen=True)
class RegressionFit:
    mu0: float
    mu1: float
    s00: float
    s11: float
    s01: float
    diagnostics: tuple[str, ...] = ()

    @property
    def cov(self) -> np.ndarray:
        return np.array([[self.s00, self.s01], [self.s01, self.s11]])


@dataclass(frozen=True)
class DesignPriorFit:
    prior: DesignPrior
    residuals_p: np.ndarray
    residuals_m: np.ndarray
    diagnostics: tuple[str, ...] = field(default=())


# ---------------------------------------------------------------------------
# Weibull shape from the ratio of reliable lives
# ---------------------------------------------------------------------------


def shape_from_ratio(ratio):
    """Weibull shape implied by a ratio tau_{2/3} / tau_{1/3} in (0, 1).

    The map is increasing: ratios near 1 mean a steep, low-spread lifetime
    distribution and a large shape.
    """
    ratio = np.asarray(ratio, dtype=float)
    if np.any(ratio <= 0) or np.any(ratio >= 1):
        raise IncoherenceError(f"tau_2/3 / tau_1/3 must lie in (0, 1), got {ratio!r}")
    out = math.log(LOG_RATIO_BASE) / np.log(ratio)
    return float(out) if out.ndim == 0 else out


def ratio_from_shape(shape):
    shape = np.asarray(shape, dtype=float)
    out = LOG_RATIO_BASE ** (1.0 / shape)
    return float(out) if out.ndim == 0 else out


def _gamma_iqr_ratio(log_shape: float) -> float:
    a = math.exp(log_shape)
    return math.log(special.gammaincinv(a, 0.75)) - math.log(special.gammaincinv(a, 0.25))


def gamma_from_quartiles(q1: float, q3: float) -> tuple[float, float]:
    """(shape, rate) of the gamma distribution with quartiles ``q1`` < ``q3``.

    The quartile ratio depends on the shape alone, so the two-equation system
    reduces to a bracketed one-dimensional root in log shape followed by a
    closed-form rate.
    """
    if not 0 < q1 < q3:
        raise IncoherenceError(f"need 0 < q1 < q3, got ({q1}, {q3})")
    target = math.log(q3 / q1)
    lo, hi = math.log(0.02), math.log(1e8)
    f_lo, f_hi = _gamma_iqr_ratio(lo) - target, _gamma_iqr_ratio(hi) - target
    if f_lo * f_hi > 0:
        raise InfeasibleError(f"no gamma distribution has quartile ratio {q3 / q1:.6g}")
    log_a = optimize.brentq(lambda x: _gamma_iqr_ratio(x) - target, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=500)
    a = math.exp(log_a)
    rate = special.gammaincinv(a, 0.25) / q1
    return a, rate


def beta_shape_prior_from_ratio(judgement: QuartileJudgement) -> GammaFit:
    """Gamma hyper-prior for the Weibull shape from quartiles of tau_{2/3}/tau_{1/3}.

    The lower and upper quartiles of the ratio map to the lower and upper
    quartiles of the shape, which pin down (a_beta, b_beta). The elicited
    median is only compared against the fitted one.
    """
    lo = shape_from_ratio(judgement.lower)
    med = shape_from_ratio(judgement.median)
    hi = shape_from_ratio(judgement.upper)
    a, b = gamma_from_quartiles(lo, hi)
    implied = float(special.gammaincinv(a, 0.5) / b)
    diags = []
    rel = abs(implied - med) / med
    if rel > 0.05:
        diags.append(
            f"elicited median shape {med:.4g} differs from the fitted gamma median {implied:.4g} "
            f"by {100 * rel:.1f}%; the quartiles were matched, the median was not"
        )
    return GammaFit(a, b, implied, med, tuple(diags))


# ---------------------------------------------------------------------------
# Location effects
# ---------------------------------------------------------------------------


def v_eps_from_ratio(upper_quartile: float, median: float = 1.0) -> VarianceFit:
    """Location-effect variance from the upper quartile of tau_i / tau_k.

    log(tau_i / tau_k) = eps_i - eps_k ~ N(0, 2 v_eps), so the ratio has median
    1 and upper quartile exp(z_0.75 sqrt(2 v_eps)).
    """
    if not upper_quartile > 1.0:
        raise IncoherenceError(f"upper quartile of a location ratio must exceed 1, got {upper_quartile}")
    diags = []
    if abs(median - 1.0) > 1e-9:
        diags.append(f"judged median ratio {median:.4g} is not 1; a ratio of exchangeable locations has median 1")
    v = (math.log(upper_quartile) / Z75) ** 2 / 2.0
    return VarianceFit(v, tuple(diags))


def _t_ratio(a: float, q1: float, q2: float) -> float:
    nu = 2.0 * a
    return float(sps.t.ppf(q1, nu) / sps.t.ppf(q2, nu))


def t_hypers_from_quantiles(
    q1_prob: float = 0.6,
    q1_value: float | None = None,
    q2_prob: float = 0.8,
    q2_value: float | None = None,
    a_bounds: tuple[float, float] = (0.5, 500.0),
) -> TFit:
    """(a_eps, b_eps) of the gamma prior on 1 / v_eps from two predictive quantiles.

    ``q*_value`` are quantiles of eps_i - eps_k (the log of a location ratio).
    Marginally (eps_i - eps_k) / sqrt(2 b / a) is Student t on 2a degrees of
    freedom, so the ratio of the two values fixes ``a`` and either value then
    fixes ``b``.
    """
    if q1_value is None or q2_value is None:
        raise DomainError("both quantile values are required")
    for q in (q1_prob, q2_prob):
        if not 0 < q < 1 or abs(q - 0.5) < 1e-12:
            raise DomainError(f"quantile probabilities must lie in (0, 1) and differ from 1/2, got {q}")
    if abs(q1_prob - q2_prob) < 1e-12 or abs(q1_prob - (1 - q2_prob)) < 1e-12:
        raise DomainError("need q1 != q2 and q1 != 1 - q2")
    for q, v in ((q1_prob, q1_value), (q2_prob, q2_value)):
        if v == 0 or (v > 0) != (q > 0.5):
            raise IncoherenceError(f"value {v} has the wrong sign for a {q} quantile of a symmetric law")

    target = q1_value / q2_value
    lo, hi = a_bounds
    normal_ratio = float(special.ndtri(q1_prob) / special.ndtri(q2_prob))
    f = lambda x: _t_ratio(math.exp(x), q1_prob, q2_prob) - target
    r_lo, r_hi = _t_ratio(lo, q1_prob, q2_prob), _t_ratio(hi, q1_prob, q2_prob)
    diags = []
    effectively_normal = False
    if min(r_lo, r_hi) <= target <= max(r_lo, r_hi):
        a = math.exp(optimize.brentq(f, math.log(lo), math.log(hi), xtol=1e-14, rtol=1e-15, maxiter=500))
    elif min(r_hi, normal_ratio) - 1e-12 <= target <= max(r_hi, normal_ratio) + 1e-12:
        a = hi
        effectively_normal = True
        diags.append(f"quantile ratio matches a normal law; a_eps set to the search bound {hi:g} (effectively normal)")
    else:
        raise InfeasibleError(
            f"no a_eps in ({lo:g}, {hi:g}] reproduces the quantile ratio {target:.6g}"
        )
    t1 = sps.t.ppf(q1_prob, 2.0 * a)
    b = a * (q1_value / t1) ** 2 / 2.0
    return TFit(a, b, effectively_normal, tuple(diags))


# ---------------------------------------------------------------------------
# Regression coefficients of the stress-life link
# ---------------------------------------------------------------------------


def regression_hypers(judgements: Mapping[float, QuartileJudgement], v_eps: float) -> RegressionFit:
    """Bivariate normal hyper-parameters of (alpha_0, alpha_1).

    ``judgements`` maps three stresses, one of them 0, to quartiles of the
    reliable life tau_{1/3} (time units). With q = 1/3 the shape term of
    log tau is ignored, so log tau(s) is treated as -(alpha_0 + alpha_1 s + eps):

    * medians give mu_0 (at s = 0) and mu_1 (at the first non-zero stress);
    * the log-scale quartile spread gives Var log tau(s) =
      s00 + 2 s s01 + s^2 s11 + v_eps at each stress.
    """
    if len(judgements) != 3 or 0.0 not in {float(s) for s in judgements}:
        raise DomainError("need judgements at exactly three stresses including s = 0")
    if v_eps < 0:
        raise DomainError(f"v_eps must be non-negative, got {v_eps}")
    others = sorted((float(s) for s in judgements if float(s) != 0.0), key=abs)
    s1, s2 = others
    if s1 == s2:
        raise DomainError("the two non-zero stresses must differ")
    by_s = {float(s): j for s, j in judgements.items()}
    diags = []

    def log_summary(s):
        j = by_s[s]
        if j.lower <= 0:
            raise IncoherenceError(f"reliable-life quartiles must be positive (stress {s})")
        lq1, lmed, lq3 = math.log(j.lower), math.log(j.median), math.log(j.upper)
        mid = 0.5 * (lq1 + lq3)
        if abs(lmed - mid) > 1e-6 * max(1.0, abs(mid)):
            diags.append(f"stress {s:g}: log quartiles are not symmetric about the log median")
        return lmed, ((lq3 - lq1) / (2.0 * Z75)) ** 2

    m0, var0 = log_summary(0.0)
    m1, var1 = log_summary(s1)
    m2, var2 = log_summary(s2)

    mu0 = -m0
    mu1 = -(m1 - m0) / s1
    pred2 = -(mu0 + mu1 * s2)
    if abs(pred2 - m2) > 1e-6 * max(1.0, abs(m2)):
        diags.append(
            f"median at stress {s2:g} ({math.exp(m2):.4g}) is not on the line through the other "
            f"two medians (predicted {math.exp(pred2):.4g})"
        )

    s00 = var0 - v_eps
    if s00 < -1e-12 * max(1.0, var0):
        raise IncoherenceError(
            f"quartile spread at s = 0 implies variance {var0:.6g}, below v_eps = {v_eps:.6g}"
        )
    if abs(s00) <= 1e-12 * max(1.0, var0):
        s00 = 0.0
        diags.append("no spread beyond v_eps at s = 0: sigma_00^2 is on the boundary 0")

    A = np.array([[2.0 * s1, s1 * s1], [2.0 * s2, s2 * s2]])
    rhs = np.array([var1 - s00 - v_eps, var2 - s00 - v_eps])
    s01, s11 = np.linalg.solve(A, rhs)
    cov = np.array([[s00, s01], [s01, s11]])
    eig = np.linalg.eigvalsh(cov)
    scale = max(1.0, float(np.abs(cov).max()))
    if eig[0] < -1e-10 * scale:
        raise IncoherenceError(
            f"implied covariance of (alpha_0, alpha_1) is not positive definite "
            f"(smallest eigenvalue {eig[0]:.6g})"
        )
    if eig[0] <= 1e-10 * scale:
        diags.append(f"implied covariance is singular (smallest eigenvalue {eig[0]:.3g})")
    return RegressionFit(float(mu0), float(mu1), float(s00), float(s11), float(s01), tuple(diags))


# ---------------------------------------------------------------------------
# Binomial priors
# ---------------------------------------------------------------------------


def sceptical_beta(pi_t: float, delta: float, b: float = 2.0) -> BetaPrior:
    """beta(a, b) with prior probability ``delta`` that pi exceeds ``pi_t``.

    Solves 1 - I_{pi_t}(a, b) = delta for ``a`` with ``b`` held fixed.
    """
    if not 0 < pi_t < 1 or not 0 < delta < 1 or not b > 0:
        raise DomainError(f"need 0 < pi_t < 1, 0 < delta < 1, b > 0; got ({pi_t}, {delta}, {b})")
    f = lambda log_a: (1.0 - special.betainc(math.exp(log_a), b, pi_t)) - delta
    lo, hi = math.log(1e-4), math.log(1e6)
    if f(lo) * f(hi) > 0:
        raise InfeasibleError(f"no a in (1e-4, 1e6) gives Pr(pi > {pi_t}) = {delta} with b = {b}")
    a = math.exp(optimize.brentq(f, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=500))
    return BetaPrior(a, b)


def _fit_two_param(dist, mean, q1, q3, x0):
    scale = q3 - q1

    def resid(logp):
        a, b = np.exp(logp)
        d = dist(a, b)
        return np.array([d.mean() - mean, d.ppf(0.25) - q1, d.ppf(0.75) - q3]) / scale

    sol = optimize.least_squares(resid, np.log(x0), xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
    return np.exp(sol.x), sol.fun * scale


def binomial_design_hypers(
    mean_p: float,
    quartiles_p: tuple[float, float],
    mean_m: float,
    quartiles_m: tuple[float, float],
    tolerance: float = 1e-6,
) -> DesignPriorFit:
    """Fit beta(a_p, b_p) and gamma(a_m, b_m) to a mean and two quartiles each.

    Three judgements and two parameters: each pair is a least-squares fit on
    {mean, Q1, Q3}, scaled by the interquartile range. Residuals above
    ``tolerance`` (relative to that range) are reported as diagnostics.
    """
    p1, p3 = quartiles_p
    m1, m3 = quartiles_m
    if not 0 < p1 < p3 < 1 or not 0 < mean_p < 1:
        raise IncoherenceError(f"need 0 < Q1 < Q3 < 1 and 0 < mean < 1 for p, got {mean_p}, {quartiles_p}")
    if not 0 < m1 < m3 or not mean_m > 0:
        raise IncoherenceError(f"need 0 < Q1 < Q3 and mean > 0 for m, got {mean_m}, {quartiles_m}")

    sd_p = (p3 - p1) / (2 * Z75)
    total = max(mean_p * (1 - mean_p) / sd_p**2 - 1.0, 1e-2)
    (a_p, b_p), r_p = _fit_two_param(sps.beta, mean_p, p1, p3, (mean_p * total, (1 - mean_p) * total))

    sd_m = (m3 - m1) / (2 * Z75)
    shape0 = (mean_m / sd_m) ** 2
    (a_m, rate_m), r_m = _fit_two_param(
        lambda a, b: sps.gamma(a, scale=1.0 / b), mean_m, m1, m3, (shape0, shape0 / mean_m)
    )
    diags = []
    if np.max(np.abs(r_p)) > tolerance * (p3 - p1):
        diags.append(f"no beta matches the judgements for p exactly; residuals {np.round(r_p, 6).tolist()}")
    if np.max(np.abs(r_m)) > tolerance * (m3 - m1):
        diags.append(f"no gamma matches the judgements for m exactly; residuals {np.round(r_m, 6).tolist()}")
    return DesignPriorFit(DesignPrior(float(a_p), float(b_p), float(a_m), float(rate_m)), r_p, r_m, tuple(diags))
