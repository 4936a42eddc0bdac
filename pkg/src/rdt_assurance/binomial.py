"""Cut-offs and assurance for binomial (failure-on-demand) demonstration tests.

A test plan puts ``n`` items on demand and passes when at most ``c`` fail.
Assurance is the predictive probability of passing, averaged over a *design*
distribution for the survival probability pi, while ``c`` is fixed by the
*analysis* rule (exact test, normal approximation or Bayesian threshold under
its own analysis prior).

Conventions
-----------
* ``c = -1`` means no outcome passes; such a plan has assurance 0.
* Every threshold comparison is inclusive: pass when probability <= level.
* Gamma hyper-priors use shape/rate, so gamma(200, 1) has mean 200.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence, Union

import numpy as np
from scipy import special, stats as sps

from . import stats
from .errors import DomainError, IncoherenceError, InitializationError
from .stats import RandomSource, as_generator

log = logging.getLogger(__name__)

WeightCount = Literal["survivals", "failures"]
NormalStatistic = Literal["literal", "failures"]


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TestPlan:
    """``n`` items on test, pass with at most ``c`` failures."""

    __test__ = False  # keep pytest from collecting this as a test class

    n: int
    c: int

    def __post_init__(self):
        if self.n < 0 or not -1 <= self.c <= self.n:
            raise DomainError(f"need n >= 0 and -1 <= c <= n, got (n={self.n}, c={self.c})")


@dataclass(frozen=True)
class BetaPrior:
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0 and math.isfinite(self.a) and math.isfinite(self.b)):
            raise DomainError(f"beta parameters must be positive, got ({self.a}, {self.b})")

    @property
    def mean(self) -> float:
        return self.a / (self.a + self.b)

    def as_mixture(self) -> "MixturePrior":
        return MixturePrior((self,), (1.0,))


@dataclass(frozen=True)
class MixturePrior:
    """Finite mixture of beta densities with positive weights summing to one."""

    components: tuple[BetaPrior, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if not self.components or len(self.components) != len(self.weights):
            raise DomainError("mixture needs one weight per component and at least one component")
        if any(w <= 0 for w in self.weights) or abs(sum(self.weights) - 1.0) > 1e-12:
            raise DomainError(f"mixture weights must be positive and sum to 1, got {self.weights}")

    @classmethod
    def normalized(cls, components, weights) -> "MixturePrior":
        w = np.asarray(weights, dtype=float)
        return cls(tuple(components), tuple(w / w.sum()))

    @property
    def a(self) -> np.ndarray:
        return np.array([c.a for c in self.components])

    @property
    def b(self) -> np.ndarray:
        return np.array([c.b for c in self.components])

    def prob_above(self, pi_t: float) -> float:
        """Prior probability that pi exceeds ``pi_t``."""
        return float(np.dot(self.weights, 1.0 - special.betainc(self.a, self.b, pi_t)))


AnalysisPrior = Union[BetaPrior, MixturePrior]


def _as_mixture(prior: AnalysisPrior) -> MixturePrior:
    return prior.as_mixture() if isinstance(prior, BetaPrior) else prior


@dataclass(frozen=True)
class DesignPrior:
    """Hierarchical design prior pi ~ beta(m p, m (1 - p)).

    The mean reliability ``p ~ beta(a_p, b_p)`` and the prior sample size
    ``m ~ gamma(a_m, b_m)`` (shape, rate) are the quantities an engineer can
    actually talk about.
    """

    a_p: float
    b_p: float
    a_m: float
    b_m: float

    def __post_init__(self):
        vals = (self.a_p, self.b_p, self.a_m, self.b_m)
        if not all(v > 0 and math.isfinite(v) for v in vals):
            raise DomainError(f"design prior hyper-parameters must be positive, got {vals}")

    def sample_hyper(self, source: RandomSource, size: int) -> tuple[np.ndarray, np.ndarray]:
        rng = as_generator(source)
        p = stats.sample_beta(rng, self.a_p, self.b_p, size)
        m = stats.sample_gamma(rng, self.a_m, self.b_m, size)
        return p, m

    def sample_pi(self, source: RandomSource, size: int) -> np.ndarray:
        rng = as_generator(source)
        p, m = self.sample_hyper(rng, size)
        return rng.beta(m * p, m * (1.0 - p))


@dataclass(frozen=True)
class HistoricalData:
    """Past demand records: ``x[i]`` failures out of ``n[i]`` demands."""

    n: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.n, dtype=np.int64).ravel()
        x = np.asarray(self.x, dtype=np.int64).ravel()
        if n.size == 0 or n.shape != x.shape:
            raise DomainError("historical data needs at least one (n, x) record")
        bad = np.nonzero((x < 0) | (x > n))[0]
        if bad.size:
            i = int(bad[0])
            raise IncoherenceError(f"record {i + 1}: need 0 <= x <= n, got n={n[i]}, x={x[i]}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "x", x)

    def __len__(self):
        return self.n.size

    @classmethod
    def from_csv(cls, path: str | Path) -> "HistoricalData":
        """Read a ``n,x`` CSV (header required, one integer record per row)."""
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["n", "x"]:
                raise IncoherenceError(f"{path}: expected header 'n,x', got {reader.fieldnames}")
            rows = []
            for lineno, row in enumerate(reader, start=2):
                try:
                    n, x = int(row["n"]), int(row["x"])
                except (TypeError, ValueError):
                    raise IncoherenceError(f"{path}:{lineno}: non-integer record {row}") from None
                if x > n or x < 0 or n < 0:
                    raise IncoherenceError(f"{path}:{lineno}: need 0 <= x <= n, got n={n}, x={x}")
                rows.append((n, x))
        if not rows:
            raise IncoherenceError(f"{path}: no records")
        arr = np.array(rows, dtype=np.int64)
        return cls(arr[:, 0], arr[:, 1])


@dataclass(frozen=True)
class AssuranceEstimate:
    value: float
    mc_std_error: float
    n_draws: int

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0 or self.mc_std_error < 0:
            raise DomainError(f"invalid assurance estimate {self.value} +/- {self.mc_std_error}")


@dataclass(frozen=True)
class CutoffDistribution:
    """Producer's distribution over the cut-off: Pr(c = j) = masses[j - lower]."""

    lower: int
    masses: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=float)
        if m.size == 0 or np.any(m < 0) or abs(m.sum() - 1.0) > 1e-12:
            raise DomainError("cut-off masses must be non-negative and sum to 1")
        object.__setattr__(self, "masses", m)

    @property
    def upper(self) -> int:
        return self.lower + self.masses.size - 1

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.lower, self.upper + 1)

    @classmethod
    def from_cutoffs(cls, cutoffs: Sequence[int], weights: Sequence[float]) -> "CutoffDistribution":
        cutoffs = np.asarray(cutoffs, dtype=int)
        lo, hi = int(cutoffs.min()), int(cutoffs.max())
        masses = np.zeros(hi - lo + 1)
        np.add.at(masses, cutoffs - lo, np.asarray(weights, dtype=float))
        return cls(lo, masses)


@dataclass(frozen=True)
class MCMCSettings:
    """Chain length and tuning; the adaptive proposal is frozen after burn-in."""

    iterations: int = 11_000
    burn_in: int = 1_000
    thin: int = 1
    proposal_scale: tuple[float, ...] = (0.3, 0.3)
    target_accept: float = 0.3
    adapt_every: int = 50

    def __post_init__(self):
        if not self.iterations > self.burn_in >= 0 or self.thin < 1:
            raise DomainError(
                f"need iterations > burn_in >= 0 and thin >= 1, got "
                f"({self.iterations}, {self.burn_in}, {self.thin})"
            )

    @property
    def n_kept(self) -> int:
        return len(range(self.burn_in, self.iterations, self.thin))


# ---------------------------------------------------------------------------
# Cut-off rules
# ---------------------------------------------------------------------------


def _check_level(name, value):
    if not 0.0 < value < 1.0:
        raise DomainError(f"{name} must lie in (0, 1), got {value}")


def _check_n(n):
    if int(n) != n or n < 1:
        raise DomainError(f"sample size must be a positive integer, got {n}")
    return int(n)


def cutoff_exact(n: int, pi_t: float, alpha: float) -> int:
    """Largest ``c`` with Pr(Y <= c | pi = pi_t) <= alpha, or -1 when none exists.

    Y counts failures, so each failure has probability ``1 - pi_t``.
    """
    n = _check_n(n)
    _check_level("pi_t", pi_t)
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    theta = 1.0 - pi_t
    c = int(sps.binom.ppf(alpha, n, theta))
    while c >= 0 and special.bdtr(c, n, theta) > alpha:
        c -= 1
    while c < n and special.bdtr(c + 1, n, theta) <= alpha:
        c += 1
    return c


def cutoff_normal(n: int, pi_t: float, alpha: float, statistic: NormalStatistic = "literal") -> int:
    """Largest ``c`` with Z(c) < z_alpha, or -1, where z_alpha is the lower-tail critical value.

    ``statistic="literal"`` uses Z(y) = (y/n - pi_t) / sqrt(pi_t (1 - pi_t) / n)
    exactly as that statistic is usually written, with the failure count
    ``y`` compared against the survival target. At high reliability this
    admits almost any number of failures. ``statistic="failures"`` compares
    the failure proportion with 1 - pi_t, which is the normal approximation
    to :func:`cutoff_exact`.
    """
    n = _check_n(n)
    _check_level("pi_t", pi_t)
    _check_level("alpha", alpha)
    if statistic not in ("literal", "failures"):
        raise DomainError(f"statistic must be 'literal' or 'failures', got {statistic!r}")
    z_alpha = stats.normal_quantile(alpha)
    y = np.arange(n + 1)
    centre = pi_t if statistic == "literal" else 1.0 - pi_t
    z = (y / n - centre) / math.sqrt(pi_t * (1.0 - pi_t) / n)
    ok = np.nonzero(z < z_alpha)[0]
    return int(ok[-1]) if ok.size else -1


def posterior_fail_prob(n: int, c, prior: BetaPrior, pi_t: float):
    """Pr_A(pi <= pi_t | Y = c) under a beta analysis prior (broadcasts over ``c``)."""
    c = np.asarray(c)
    if np.any(c < 0) or np.any(c > n):
        raise DomainError(f"need 0 <= c <= n, got c={c!r}, n={n}")
    return stats.reg_inc_beta(pi_t, prior.a + n - c, prior.b + c)


def mixture_posterior_update(prior: MixturePrior, n: int, y: int) -> MixturePrior:
    """Conjugate update of a beta mixture after ``y`` successes in ``n`` trials.

    Components become beta(a_i + y, b_i + n - y); weights are multiplied by each
    component's marginal likelihood B(a_i + y, b_i + n - y) / B(a_i, b_i) and
    renormalized in log space. Callers decide whether ``y`` counts survivals
    or failures.
    """
    if not 0 <= y <= n:
        raise DomainError(f"need 0 <= y <= n, got y={y}, n={n}")
    prior = _as_mixture(prior)
    a, b = prior.a, prior.b
    logw = np.log(prior.weights) + special.betaln(a + y, b + n - y) - special.betaln(a, b)
    w = np.exp(logw - logw.max())
    w /= w.sum()
    comps = tuple(BetaPrior(float(ai + y), float(bi + n - y)) for ai, bi in zip(a, b))
    return MixturePrior(comps, tuple(w / w.sum()))


def _mixture_weights(prior: MixturePrior, n: int, c: np.ndarray, count: WeightCount) -> np.ndarray:
    """Posterior component weights, shape (components, len(c))."""
    a, b = prior.a[:, None], prior.b[:, None]
    y = n - c if count == "survivals" else c
    logw = np.log(np.asarray(prior.weights))[:, None] + special.betaln(a + y, b + n - y) - special.betaln(a, b)
    w = np.exp(logw - logw.max(axis=0))
    return w / w.sum(axis=0)


def posterior_fail_prob_mixture(
    n: int, c, prior: AnalysisPrior, pi_t: float, weight_count: WeightCount = "survivals"
):
    """Pr_A(pi <= pi_t | Y = c) under a beta-mixture analysis prior.

    Each component contributes its conjugate posterior mass below ``pi_t``,
    I_{pi_t}(a_m + n - c, b_m + c), weighted by the updated mixture weights.

    ``weight_count`` selects which count drives the weight update. With
    ``"survivals"`` (default) the weights are the exact posterior weights and
    the result is the exact posterior probability. ``"failures"`` feeds the
    failure count ``c`` into the (a + y, b + n - y) weight update instead;
    the component posteriors are unchanged. It is kept to reproduce published
    design curves that were computed that way.
    """
    prior = _as_mixture(prior)
    c_arr = np.atleast_1d(np.asarray(c))
    if np.any(c_arr < 0) or np.any(c_arr > n):
        raise DomainError(f"need 0 <= c <= n, got c={c!r}, n={n}")
    if weight_count not in ("survivals", "failures"):
        raise DomainError(f"weight_count must be 'survivals' or 'failures', got {weight_count!r}")
    w = _mixture_weights(prior, n, c_arr, weight_count)
    comp = special.betainc(prior.a[:, None] + n - c_arr, prior.b[:, None] + c_arr, pi_t)
    out = (w * comp).sum(axis=0)
    return float(out[0]) if np.ndim(c) == 0 else out


def cutoff_bayes(
    n: int,
    prior: AnalysisPrior,
    pi_t: float,
    delta: float,
    weight_count: WeightCount = "survivals",
) -> int:
    """Largest ``c`` in [0, n] with Pr_A(pi <= pi_t | Y = c) <= delta, or -1."""
    n = _check_n(n)
    _check_level("pi_t", pi_t)
    if not 0.0 < delta <= 1.0:
        raise DomainError(f"delta must lie in (0, 1], got {delta}")
    c = np.arange(n + 1)
    if isinstance(prior, BetaPrior):
        prob = special.betainc(prior.a + n - c, prior.b + c, pi_t)
    else:
        prob = posterior_fail_prob_mixture(n, c, prior, pi_t, weight_count)
    ok = np.nonzero(prob <= delta)[0]
    return int(ok[-1]) if ok.size else -1


@dataclass(frozen=True)
class ExactTest:
    pi_t: float
    alpha: float = 0.05

    def cutoff(self, n: int) -> int:
        return cutoff_exact(n, self.pi_t, self.alpha)


@dataclass(frozen=True)
class NormalApprox:
    pi_t: float
    alpha: float = 0.05
    statistic: NormalStatistic = "literal"

    def cutoff(self, n: int) -> int:
        return cutoff_normal(n, self.pi_t, self.alpha, self.statistic)


@dataclass(frozen=True)
class BayesThreshold:
    """Pass when the analysis posterior Pr_A(pi <= pi_t | data) is at most ``delta``."""

    prior: AnalysisPrior
    pi_t: float
    delta: float = 0.05
    weight_count: WeightCount = "survivals"

    def cutoff(self, n: int) -> int:
        return cutoff_bayes(n, self.prior, self.pi_t, self.delta, self.weight_count)


CutoffRule = Union[ExactTest, NormalApprox, BayesThreshold]


# ---------------------------------------------------------------------------
# Assurance
# ---------------------------------------------------------------------------


def _estimate(values: np.ndarray) -> AssuranceEstimate:
    n = values.size
    mean = float(np.clip(values.mean(), 0.0, 1.0))
    se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return AssuranceEstimate(mean, se, n)


def pass_probabilities(n: int, c: int, pi_draws: np.ndarray) -> np.ndarray:
    """Pr(Y <= c | pi) for each draw of pi."""
    pi_draws = np.asarray(pi_draws, dtype=float)
    if c < 0:
        return np.zeros_like(pi_draws)
    if c >= n:
        return np.ones_like(pi_draws)
    return special.bdtr(c, n, 1.0 - pi_draws)


def assurance_from_cutoff(n: int, c: int, pi_draws) -> AssuranceEstimate:
    pi_draws = np.asarray(pi_draws, dtype=float)
    if pi_draws.size == 0:
        raise DomainError("need at least one draw of pi")
    return _estimate(pass_probabilities(n, c, pi_draws))


def assurance_posterior(n: int, rule: CutoffRule, pi_draws) -> AssuranceEstimate:
    """Monte Carlo assurance averaged over supplied (prior or posterior) draws of pi."""
    n = _check_n(n)
    return assurance_from_cutoff(n, rule.cutoff(n), pi_draws)


def assurance_prior(
    n: int, rule: CutoffRule, design: DesignPrior, n_draws: int = 100_000, stream: RandomSource | None = None
) -> AssuranceEstimate:
    """Assurance under the hierarchical design prior.

    The cut-off depends only on ``n`` and the rule, so it is computed once and
    the binomial CDF at that cut-off is averaged over ``n_draws`` prior draws.
    """
    if n_draws < 1:
        raise DomainError("n_draws must be at least 1")
    n = _check_n(n)
    pi = design.sample_pi(stream if stream is not None else stats.RandomStream(0), n_draws)
    return assurance_from_cutoff(n, rule.cutoff(n), pi)


@dataclass(frozen=True)
class SampleSizeResult:
    """Outcome of a sample-size search.

    ``reached`` is False when no ``n <= n_max`` meets the target; ``n`` is then
    None and ``best_n`` / ``best`` record the highest assurance seen.
    """

    reached: bool
    target: float
    n: int | None
    c: int | None
    estimate: AssuranceEstimate | None
    best_n: int
    best_c: int
    best: AssuranceEstimate


def find_min_n(
    rule: CutoffRule, pi_draws, gamma: float, n_max: int = 1_000, n_min: int = 1
) -> SampleSizeResult:
    """Smallest ``n`` whose assurance reaches ``gamma``, by upward scan.

    The curve is a sawtooth: while the cut-off stays fixed, every draw's pass
    probability falls as ``n`` grows, so the average does too. Only the first
    ``n`` of each constant-cut-off run can therefore be the first to reach the
    target, and the rest of the run is skipped without being evaluated.
    The same draws are used for every ``n``.
    """
    if not 0.0 <= gamma < 1.0:
        raise DomainError(f"gamma must lie in [0, 1), got {gamma}")
    pi_draws = np.asarray(pi_draws, dtype=float)
    best = None
    prev_c = None
    for n in range(max(1, n_min), n_max + 1):
        c = rule.cutoff(n)
        if c == prev_c and n > n_min:
            continue
        prev_c = c
        est = assurance_from_cutoff(n, c, pi_draws)
        if best is None or est.value > best[2].value:
            best = (n, c, est)
        if est.value >= gamma:
            return SampleSizeResult(True, gamma, n, c, est, n, c, est)
    return SampleSizeResult(False, gamma, None, None, None, *best)


def assurance_curve(rule: CutoffRule, ns: Sequence[int], pi_draws) -> list[tuple[int, int, AssuranceEstimate]]:
    """Assurance at each sample size in ``ns`` using one shared set of draws."""
    pi_draws = np.asarray(pi_draws, dtype=float)
    out = []
    for n in ns:
        c = rule.cutoff(int(n))
        out.append((int(n), c, assurance_from_cutoff(int(n), c, pi_draws)))
    return out


@dataclass(frozen=True)
class ScenarioAssurance:
    """Assurance when the consumer's analysis prior is itself uncertain.

    ``tail_weights[k]`` is Pr(c >= k) for k = 0..J_U and ``s[k]`` is the
    predictive probability of exactly ``k`` failures, so that
    ``estimate.value == sum(tail_weights * s)``.
    """

    estimate: AssuranceEstimate
    cutoffs: tuple[int, ...]
    distribution: CutoffDistribution
    s: np.ndarray
    tail_weights: np.ndarray


def assurance_cutoff_distribution(
    n: int,
    scenarios: Sequence[tuple[float, AnalysisPrior]],
    pi_t: float,
    delta: float,
    pi_draws,
    weight_count: WeightCount = "survivals",
) -> ScenarioAssurance:
    """Assurance averaged over possible consumer priors.

    ``scenarios`` holds ``(q_m, prior_m)`` pairs; each prior implies a cut-off
    c_m and the result is sum_m q_m E[Pr(Y <= c_m | pi)] over the draws.
    """
    n = _check_n(n)
    if not scenarios:
        raise DomainError("need at least one scenario")
    q = np.array([s[0] for s in scenarios], dtype=float)
    if np.any(q <= 0) or abs(q.sum() - 1.0) > 1e-12:
        raise DomainError(f"scenario weights must be positive and sum to 1, got {q}")
    pi_draws = np.asarray(pi_draws, dtype=float)
    cutoffs = tuple(cutoff_bayes(n, prior, pi_t, delta, weight_count) for _, prior in scenarios)

    per_draw = np.zeros_like(pi_draws)
    for qm, cm in zip(q, cutoffs):
        per_draw += qm * pass_probabilities(n, cm, pi_draws)
    estimate = _estimate(per_draw)

    dist = CutoffDistribution.from_cutoffs(cutoffs, q)
    j_upper = max(dist.upper, -1)
    ks = np.arange(j_upper + 1)
    s = np.array([np.mean(sps.binom.pmf(k, n, 1.0 - pi_draws)) for k in ks])
    tail = np.array([dist.masses[dist.support >= k].sum() for k in ks])
    return ScenarioAssurance(estimate, cutoffs, dist, s, tail)


# ---------------------------------------------------------------------------
# Design posterior from historical pass/fail data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PosteriorDraws:
    """Retained MCMC output: hyper-parameters and a fresh pi for a new unit."""

    p: np.ndarray
    m: np.ndarray
    pi: np.ndarray
    acceptance_rate: float
    proposal_scale: tuple[float, float]
    accept_history: np.ndarray = field(repr=False)


def _log_hyper_target(lp, lm, design: DesignPrior, n_i, x_i):
    """Log posterior of (logit p, log m) with each group's pi_i integrated out."""
    p = special.expit(lp)
    m = math.exp(lm)
    a, b = m * p, m * (1.0 - p)
    # beta(a_p, b_p) on p plus logit Jacobian p (1 - p)
    out = design.a_p * math.log(p) + design.b_p * math.log1p(-p)
    # gamma(a_m, b_m) on m plus log Jacobian m
    out += design.a_m * lm - design.b_m * m
    # beta-binomial evidence of each record
    out += float(np.sum(special.betaln(a + n_i - x_i, b + x_i))) - n_i.size * special.betaln(a, b)
    return out


def design_posterior_draws(
    design: DesignPrior,
    data: HistoricalData,
    mcmc: MCMCSettings = MCMCSettings(),
    stream: RandomSource | None = None,
) -> PosteriorDraws:
    """Sample the design posterior of pi for a new unit given historical records.

    (logit p, log m) takes random-walk Metropolis steps against the posterior
    with every group's pi_i integrated out, which is the beta-binomial evidence
    of its record. Given (p, m) the group reliabilities are conjugate,
    pi_i ~ beta(a + n_i - x_i, b + x_i), so collapsing them leaves the target
    unchanged while removing the strong pi_i / (p, m) coupling that stalls a
    plain Gibbs sweep. Proposal scales adapt during burn-in only.
    Each retained iteration emits pi ~ beta(m p, m (1 - p)) for the new unit.
    """
    rng = as_generator(stream if stream is not None else stats.RandomStream(0))
    n_i = data.n.astype(float)
    x_i = data.x.astype(float)

    p0 = design.a_p / (design.a_p + design.b_p)
    m0 = design.a_m / design.b_m
    state = np.array([special.logit(p0), math.log(m0)])
    scale = np.array(mcmc.proposal_scale[:2], dtype=float)

    kept = mcmc.n_kept
    out_p, out_m, out_pi = np.empty(kept), np.empty(kept), np.empty(kept)
    accepts = np.zeros(mcmc.iterations, dtype=bool)
    window_acc = 0
    k = 0

    cur = _log_hyper_target(state[0], state[1], design, n_i, x_i)
    if not math.isfinite(cur):
        raise InitializationError("log-posterior is not finite at the initial state")

    for it in range(mcmc.iterations):
        prop = state + scale * rng.standard_normal(2)
        new = _log_hyper_target(prop[0], prop[1], design, n_i, x_i)
        if math.log(rng.random()) < new - cur:
            state, cur = prop, new
            accepts[it] = True
            window_acc += 1

        if it < mcmc.burn_in and (it + 1) % mcmc.adapt_every == 0:
            rate = window_acc / mcmc.adapt_every
            scale *= math.exp((rate - mcmc.target_accept) * 2.0)
            window_acc = 0

        if it >= mcmc.burn_in and (it - mcmc.burn_in) % mcmc.thin == 0:
            p = special.expit(state[0])
            m = math.exp(state[1])
            out_p[k], out_m[k] = p, m
            out_pi[k] = rng.beta(m * p, m * (1.0 - p))
            k += 1

    rate = float(accepts[mcmc.burn_in:].mean())
    log.debug("binomial design posterior: acceptance %.3f, scales %s", rate, scale)
    return PosteriorDraws(out_p, out_m, out_pi, rate, (float(scale[0]), float(scale[1])), accepts)
