"""Producer's and consumer's risks for binomial test plans.

Three flavours are supported for a plan (n, c):

=========  ==============================  ==============================
flavour    producer's risk                 consumer's risk
=========  ==============================  ==============================
classical  Pr(fail | pi = pi_0)            Pr(pass | pi = pi_1)
average    Pr(fail | pi >= pi_0)           Pr(pass | pi <= pi_1)
posterior  Pr(pi >= pi_0 | fail)           Pr(pi <= pi_1 | pass)
=========  ==============================  ==============================

The average and posterior risks are Monte Carlo averages over draws of pi
(prior or design-posterior); when the prior is a single beta the conjugate
closed forms are available as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import stats
from .binomial import BetaPrior, TestPlan, pass_probabilities
from .errors import DomainError
from .stats import RandomSource, as_generator


@dataclass(frozen=True)
class RiskLevels:
    """Acceptable level ``pi_0``, rejectable level ``pi_1`` and maximum risks."""

    pi_0: float
    pi_1: float
    alpha_max: float = 0.05
    beta_max: float = 0.05

    def __post_init__(self):
        if not 0.0 < self.pi_1 <= self.pi_0 < 1.0:
            raise DomainError(f"need 0 < pi_1 <= pi_0 < 1, got pi_0={self.pi_0}, pi_1={self.pi_1}")
        for name in ("alpha_max", "beta_max"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise DomainError(f"{name} must lie in (0, 1], got {v}")


@dataclass(frozen=True)
class Risks:
    producer: float
    consumer: float
    producer_se: float = 0.0
    consumer_se: float = 0.0


class ConditioningMassError(DomainError):
    """No Monte Carlo draw falls in the conditioning event."""


class DegeneratePlanError(DomainError):
    """The plan passes (or fails) almost surely, so a posterior risk is undefined."""


def classical_risks(plan: TestPlan, levels: RiskLevels) -> Risks:
    pass0 = float(pass_probabilities(plan.n, plan.c, np.array([levels.pi_0]))[0])
    pass1 = float(pass_probabilities(plan.n, plan.c, np.array([levels.pi_1]))[0])
    return Risks(producer=1.0 - pass0, consumer=pass1)


def _ratio_se(num: np.ndarray, den: np.ndarray) -> tuple[float, float]:
    """Ratio of means and its delta-method standard error."""
    n = num.size
    r = num.mean() / den.mean()
    if n < 2:
        return float(r), 0.0
    resid = num - r * den
    return float(r), float(resid.std(ddof=1) / (math.sqrt(n) * den.mean()))


def average_risks(
    plan: TestPlan,
    levels: RiskLevels,
    sampler,
    n_draws: int = 100_000,
    stream: RandomSource | None = None,
) -> Risks:
    """Monte Carlo average risks.

    ``sampler`` is anything with ``sample_pi(stream, size)`` (such as a
    :class:`~rdt_assurance.binomial.DesignPrior`) or a callable
    ``(generator, size) -> draws``.
    """
    rng = as_generator(stream if stream is not None else stats.RandomStream(0))
    if hasattr(sampler, "sample_pi"):
        pi = np.asarray(sampler.sample_pi(rng, n_draws), dtype=float)
    else:
        pi = np.asarray(sampler(rng, n_draws), dtype=float)
    return average_risks_from_draws(plan, levels, pi)


def average_risks_from_draws(plan: TestPlan, levels: RiskLevels, pi_draws) -> Risks:
    pi = np.asarray(pi_draws, dtype=float)
    ok = pass_probabilities(plan.n, plan.c, pi)
    good = pi >= levels.pi_0
    bad = pi <= levels.pi_1
    if not good.any():
        raise ConditioningMassError(f"no draw has pi >= pi_0 = {levels.pi_0}")
    if not bad.any():
        raise ConditioningMassError(f"no draw has pi <= pi_1 = {levels.pi_1}")
    prod, prod_se = _ratio_se((1.0 - ok) * good, good.astype(float))
    cons, cons_se = _ratio_se(ok * bad, bad.astype(float))
    return Risks(prod, cons, prod_se, cons_se)


def _fail_probabilities(n: int, c, pi: np.ndarray) -> np.ndarray:
    """Pr(Y > c | pi) from the upper tail directly, avoiding 1 - F cancellation."""
    c = np.asarray(c)
    theta = 1.0 - pi
    out = special.bdtrc(np.clip(c, 0, n), n, theta)
    return np.where(c < 0, 1.0, np.where(c >= n, 0.0, out))


def posterior_risks(plan: TestPlan, levels: RiskLevels, pi_draws, min_mass: float = 1e-6) -> Risks:
    """Posterior risks estimated over draws of pi.

    producer = mean[(1 - F_c(pi)) 1(pi >= pi_0)] / (1 - mean[F_c(pi)])
    consumer = sum[F_c(pi) 1(pi <= pi_1)] / sum[F_c(pi)]

    where F_c(pi) = Pr(Y <= c | pi). Raises :class:`DegeneratePlanError` when
    either denominator is below ``min_mass``.
    """
    pi = np.asarray(pi_draws, dtype=float)
    if pi.size == 0:
        raise DomainError("need at least one draw of pi")
    ok = pass_probabilities(plan.n, plan.c, pi)
    fail = _fail_probabilities(plan.n, plan.c, pi)
    if fail.mean() < min_mass:
        raise DegeneratePlanError(f"plan {plan} almost never fails; producer's risk undefined")
    if ok.mean() < min_mass:
        raise DegeneratePlanError(f"plan {plan} almost never passes; consumer's risk undefined")
    prod, prod_se = _ratio_se(fail * (pi >= levels.pi_0), fail)
    cons, cons_se = _ratio_se(ok * (pi <= levels.pi_1), ok)
    return Risks(prod, cons, prod_se, cons_se)


def _conjugate_tail_masses(n: int, c: int, prior: BetaPrior, cut: float):
    """For y = 0..c: predictive Pr(Y = y) and Pr(pi <= cut | Y = y)."""
    y = np.arange(max(c, -1) + 1)
    a_post = prior.a + n - y
    b_post = prior.b + y
    log_pred = (
        special.gammaln(n + 1) - special.gammaln(y + 1) - special.gammaln(n - y + 1)
        + special.betaln(a_post, b_post) - special.betaln(prior.a, prior.b)
    )
    return np.exp(log_pred), special.betainc(a_post, b_post, cut)


def posterior_risks_conjugate(plan: TestPlan, levels: RiskLevels, prior: BetaPrior) -> Risks:
    """Exact posterior risks when pi ~ beta(a, b)."""
    n, c = plan.n, plan.c
    pred, below0 = _conjugate_tail_masses(n, n, prior, levels.pi_0)
    _, below1 = _conjugate_tail_masses(n, n, prior, levels.pi_1)
    # Pr(pi >= pi_0) is continuous so ">=" and ">" coincide
    above0 = 1.0 - below0
    passed = slice(0, c + 1)
    failed = slice(c + 1, n + 1)
    p_pass = pred[passed].sum()
    p_fail = pred[failed].sum()
    if p_fail <= 0 or p_pass <= 0:
        raise DegeneratePlanError(f"plan {plan} passes or fails with certainty")
    producer = float((pred[failed] * above0[failed]).sum() / p_fail)
    consumer = float((pred[passed] * below1[passed]).sum() / p_pass)
    return Risks(producer, consumer)


@dataclass(frozen=True)
class PlanSearchResult:
    """Outcome of :func:`find_min_plan`.

    When infeasible, ``plan`` is None and ``best_plan`` is the plan with the
    smallest worst-case excess ``max(producer - alpha_max, consumer - beta_max)``.
    """

    feasible: bool
    plan: TestPlan | None
    risks: Risks | None
    best_plan: TestPlan | None
    best_risks: Risks | None
    best_margin: float


def _risk_table(n: int, levels: RiskLevels, pi: np.ndarray, min_mass: float):
    """Posterior producer/consumer risks for c = 0..n, NaN where undefined."""
    c = np.arange(n + 1)
    # F[c, j] = Pr(Y <= c | pi_j)
    F = special.bdtr(c[:, None], n, 1.0 - pi[None, :])
    G = _fail_probabilities(n, c[:, None], pi[None, :])
    ok_mean = F.mean(axis=1)
    fail_mean = G.mean(axis=1)
    good = pi >= levels.pi_0
    bad = pi <= levels.pi_1
    with np.errstate(invalid="ignore", divide="ignore"):
        prod = (G * good).mean(axis=1) / fail_mean
        cons = (F * bad).mean(axis=1) / ok_mean
    prod[fail_mean < min_mass] = np.nan
    cons[ok_mean < min_mass] = np.nan
    return prod, cons


def find_min_plan(
    levels: RiskLevels, pi_draws, n_max: int = 500, n_min: int = 1, min_mass: float = 1e-6
) -> PlanSearchResult:
    """Smallest ``n`` (then smallest ``c``) meeting both posterior risk bounds.

    A plan whose producer's or consumer's risk is undefined (it almost surely
    passes or fails) never counts as satisfying that bound.
    """
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    pi = np.asarray(pi_draws, dtype=float)
    best = (math.inf, None, None)
    for n in range(max(1, n_min), n_max + 1):
        prod, cons = _risk_table(n, levels, pi, min_mass)
        margin = np.fmax(prod - levels.alpha_max, cons - levels.beta_max)
        margin = np.where(np.isnan(prod) | np.isnan(cons), np.inf, margin)
        ok = np.nonzero(margin <= 0)[0]
        if ok.size:
            c = int(ok[0])
            r = Risks(float(prod[c]), float(cons[c]))
            return PlanSearchResult(True, TestPlan(n, c), r, TestPlan(n, c), r, float(margin[c]))
        i = int(np.argmin(margin))
        if margin[i] < best[0]:
            best = (float(margin[i]), TestPlan(n, i), Risks(float(prod[i]), float(cons[i])))
    return PlanSearchResult(False, None, None, best[1], best[2], best[0])


def per_y_posteriors(n: int, levels: RiskLevels, pi_draws) -> tuple[np.ndarray, np.ndarray]:
    """Pr(pi >= pi_0 | Y = y) and Pr(pi <= pi_1 | Y = y) for y = 0..n.

    Each draw is weighted by its binomial likelihood of exactly ``y`` failures.
    """
    pi = np.asarray(pi_draws, dtype=float)
    y = np.arange(n + 1)
    logw = stats.binom_logpmf(y[:, None], n, 1.0 - pi[None, :])
    logw = np.asarray(logw)
    w = np.exp(logw - logw.max(axis=1, keepdims=True))
    total = w.sum(axis=1)
    above = (w * (pi >= levels.pi_0)).sum(axis=1) / total
    below = (w * (pi <= levels.pi_1)).sum(axis=1) / total
    return above, below


def per_y_cutoff_bounds(n: int, levels: RiskLevels, pi_draws) -> tuple[int, int]:
    """Largest ``c`` such that every ``y <= c`` satisfies each per-outcome condition.

    Producer: Pr(pi >= pi_0 | Y = y) <= alpha_max for all y <= c.
    Consumer: Pr(pi <= pi_1 | Y = y) <= beta_max for all y <= c.
    Either bound is -1 when y = 0 already violates its condition.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    above, below = per_y_posteriors(n, levels, pi_draws)

    def longest_prefix(ok: np.ndarray) -> int:
        bad = np.nonzero(~ok)[0]
        return int(bad[0]) - 1 if bad.size else n

    return longest_prefix(above <= levels.alpha_max), longest_prefix(below <= levels.beta_max)

