"""Pass criterion, assurance estimators and test design for Weibull RDTs.

A test puts ``n`` items on test at given stresses (optionally censoring at a
fixed time) and passes when, under the analysis prior,

    r_q = Pr(tau_q >= tau_star at the use stress | data) >= 1 - delta

for a new location. Assurance is the probability of passing when the
parameters generating the data come from a design distribution (a prior or
the posterior given historical data).
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import optimize
from scipy.special import ndtr

from .. import isotonic
from ..errors import DomainError, IdentifiabilityError, InfeasibleError
from ..stats import RandomSource, RandomStream, as_generator
from .mcmc import Prediction, WeibullMCMCSettings, run_chains
from .model import LifetimeData, ReliableLifeTarget, link_transform
from .prior import DesignDraws, PosteriorSampler, PriorSampler, WeibullPrior, prior_pass_probability


@dataclass(frozen=True)
class TestConfig:
    """A Weibull test: item stresses, optional censoring time and analysis prior.

    For curves and surfaces ``stresses`` is a pattern; :meth:`for_size`
    repeats it to the requested number of items.
    """

    __test__ = False

    stresses: tuple
    analysis_prior: WeibullPrior
    censor_time: float | None = None
    mcmc: WeibullMCMCSettings = field(default_factory=WeibullMCMCSettings)
    k: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "stresses", tuple(float(s) for s in self.stresses))
        if not self.stresses:
            raise DomainError("a test needs at least one item stress")
        if self.censor_time is not None and not self.censor_time > 0:
            raise DomainError(f"censor_time must be positive, got {self.censor_time}")
        link_transform(np.asarray(self.stresses), self.k)

    @property
    def n(self) -> int:
        return len(self.stresses)

    def for_size(self, n: int) -> "TestConfig":
        if n < 1:
            raise DomainError(f"sample size must be at least 1, got {n}")
        pattern = self.stresses
        stresses = tuple(pattern[i % len(pattern)] for i in range(n))
        return TestConfig(stresses, self.analysis_prior, self.censor_time, self.mcmc, self.k)

    def with_groups(self, groups: Sequence[tuple[float, int]]) -> "TestConfig":
        stresses = tuple(s for s, m in groups for _ in range(int(m)))
        return TestConfig(stresses, self.analysis_prior, self.censor_time, self.mcmc, self.k)

    def prediction(self, target: ReliableLifeTarget) -> Prediction:
        return Prediction(
            float(link_transform(target.s_star, self.k)), math.log(-math.log(target.q)), target.log_tau_star
        )


@dataclass(frozen=True)
class PassResult:
    passed: bool
    r_q: float


def passes(r_q, delta: float):
    """The pass rule r_q >= 1 - delta (boundary included)."""
    return np.asarray(r_q) >= 1.0 - delta


# ---------------------------------------------------------------------------
# Analysis of one or many datasets
# ---------------------------------------------------------------------------


def _point_mass_r_q(prior: WeibullPrior, pred: Prediction) -> float:
    beta = float(prior.beta_fixed)
    h = pred.log_neg_log_q / beta - pred.log_tau_star - prior.mu0 - prior.mu1 * pred.x_star
    v = float(prior.v_eps)
    if v == 0:
        return float(h >= 0)
    return float(ndtr(h / math.sqrt(v)))


def _prior_r_q(prior: WeibullPrior, pred: Prediction, n_draws: int, rng) -> float:
    d = prior.sample(rng, n_draws)
    return float(np.mean(pred.holds(d.alpha0, d.alpha1, d.beta, d.eps)))


def _batch_r_q(
    logt: np.ndarray,
    fail: np.ndarray,
    x: np.ndarray,
    loc: np.ndarray,
    n_loc: int,
    config: TestConfig,
    target: ReliableLifeTarget,
    rng: np.random.Generator,
) -> np.ndarray:
    """r_q for each row of a batch of datasets sharing one layout."""
    prior = config.analysis_prior
    pred = config.prediction(target)
    B = logt.shape[0]
    if prior.point_mass:
        # the posterior equals the prior whatever the data
        return np.full(B, _point_mass_r_q(prior, pred))
    if logt.shape[1] == 0:
        return np.array([_prior_r_q(prior, pred, config.mcmc.n_kept, rng) for _ in range(B)])
    out = run_chains(logt, fail, x, loc, n_loc, prior, config.mcmc, rng, predict=pred)
    return out.r_q


def analysis_posterior_prob(
    data: LifetimeData, config: TestConfig, target: ReliableLifeTarget, stream: RandomSource | None = None
) -> float:
    """r_q = Pr_A(tau_q >= tau_star | data) estimated from the analysis posterior.

    ``config`` supplies the analysis prior, link exponent and chain settings;
    its stresses are not used (the data carry their own).
    """
    rng = as_generator(stream if stream is not None else RandomStream(0))
    x = np.asarray(link_transform(data.stress, config.k), dtype=float)
    r = _batch_r_q(
        np.log(data.time)[None, :],
        (~data.censored)[None, :],
        x,
        data.location,
        max(data.n_locations, 1),
        config,
        target,
        rng,
    )
    return float(r[0])


def pass_test(
    data: LifetimeData, config: TestConfig, target: ReliableLifeTarget, stream: RandomSource | None = None
) -> PassResult:
    r = analysis_posterior_prob(data, config, target, stream)
    return PassResult(bool(passes(r, target.delta)), r)


# ---------------------------------------------------------------------------
# Simulation and assurance
# ---------------------------------------------------------------------------


def simulate_lifetimes(draws: DesignDraws, x, rng, censor_time: float | None = None):
    """One dataset per design draw: (log times, failure flags), each (B, n).

    All items of a simulated test share the draw's fresh location effect.
    """
    log_rho = draws.log_rate(x)
    e = rng.standard_exponential(log_rho.shape)
    logt = np.log(e) / draws.beta[:, None] - log_rho
    if censor_time is None:
        return logt, np.ones_like(logt, dtype=bool)
    lc = math.log(censor_time)
    fail = logt <= lc
    return np.minimum(logt, lc), fail


@dataclass(frozen=True)
class WeibullAssurance:
    value: float
    mc_std_error: float
    n_datasets: int


def _pass_indicators(config: TestConfig, target: ReliableLifeTarget, draws: DesignDraws, rng) -> np.ndarray:
    x = np.asarray(link_transform(np.asarray(config.stresses), config.k), dtype=float)
    logt, fail = simulate_lifetimes(draws, x, rng, config.censor_time)
    loc = np.zeros(x.shape[0], dtype=int)
    r = _batch_r_q(logt, fail, x, loc, 1, config, target, rng)
    return passes(r, target.delta)


def assurance_naive(
    config: TestConfig,
    target: ReliableLifeTarget,
    sampler,
    n_design: int,
    n_datasets: int,
    stream: RandomSource | None = None,
) -> WeibullAssurance:
    """Average pass indicator over ``n_design`` parameter draws x ``n_datasets`` datasets each."""
    if n_design < 1 or n_datasets < 1:
        raise DomainError("need at least one design draw and one dataset per draw")
    rng = as_generator(stream if stream is not None else RandomStream(0))
    draws = sampler.draw(rng, n_design)
    idx = np.repeat(np.arange(n_design), n_datasets)
    rep = DesignDraws(*(getattr(draws, f)[idx] for f in ("alpha0", "alpha1", "beta", "v_eps", "eps")))
    ind = _pass_indicators(config, target, rep, rng).astype(float)
    per_draw = ind.reshape(n_design, n_datasets).mean(axis=1)
    value = float(ind.mean())
    if n_design > 1:
        se = float(per_draw.std(ddof=1) / math.sqrt(n_design))
    else:
        se = math.sqrt(value * (1 - value) / ind.size)
    return WeibullAssurance(value, se, int(ind.size))


def design_stream(stream: RandomStream, stresses: Iterable[float]) -> RandomStream:
    """Substream for a test design, keyed by its multiset of item stresses.

    Identical designs (for example (n_a, n_b) and (n_b, n_a) when both groups
    share one stress) therefore reuse one evaluation.
    """
    text = ",".join(repr(float(s)) for s in sorted(stresses))
    key = int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "little")
    return stream.child(key)


def _cell_passes(args) -> int:
    config, target, sampler, reps, stream = args
    rng = design_stream(stream, config.stresses).generator()
    draws = sampler.draw(rng, reps)
    return int(_pass_indicators(config, target, draws, rng).sum())


def _map(fn: Callable, tasks: list, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=1))


def make_grid(n_max: int, n_points: int = 60, n_min: int = 1) -> np.ndarray:
    """Up to ``n_points`` distinct, roughly evenly spaced sizes in [n_min, n_max]."""
    if not 1 <= n_min <= n_max or n_points < 1:
        raise DomainError(f"bad grid spec n_min={n_min}, n_max={n_max}, n_points={n_points}")
    return np.unique(np.round(np.linspace(n_min, n_max, n_points)).astype(int))


@dataclass(frozen=True)
class AssuranceCurve:
    """Raw pass proportions on a grid and their monotone fit.

    ``fitted`` is the weighted (by repeats) isotonic projection of ``raw``;
    between grid points it is read off as a step function and below the
    first grid point it is 0.
    """

    grid: np.ndarray
    raw: np.ndarray
    reps: np.ndarray
    fitted: np.ndarray

    def __call__(self, n):
        return isotonic.step_interpolate(self.grid, self.fitted, n)

    @property
    def n_max(self) -> int:
        return int(self.grid[-1])

    def fitted_se(self) -> np.ndarray:
        """Binomial standard error of each fitted value from the repeats pooled into it."""
        se = np.empty_like(self.fitted)
        start = 0
        for stop in range(1, self.fitted.size + 1):
            if stop == self.fitted.size or self.fitted[stop] != self.fitted[start]:
                p = self.fitted[start]
                w = self.reps[start:stop].sum()
                se[start:stop] = math.sqrt(max(p * (1 - p), 0.0) / w)
                start = stop
        return se

    def rows(self):
        for n, r, f in zip(self.grid, self.raw, self.fitted):
            yield int(n), float(r), float(f)


def fit_curve(grid, passes_count, reps) -> AssuranceCurve:
    grid = np.asarray(grid, dtype=int)
    reps = np.broadcast_to(np.asarray(reps, dtype=float), grid.shape).copy()
    raw = np.asarray(passes_count, dtype=float) / reps
    fitted = np.clip(isotonic.isotonic_fit(raw, reps), 0.0, 1.0)
    return AssuranceCurve(grid, raw, reps, fitted)


def assurance_curve(
    config: TestConfig,
    target: ReliableLifeTarget,
    sampler,
    grid: Sequence[int],
    reps: int = 20,
    stream: RandomStream | None = None,
    workers: int = 1,
) -> AssuranceCurve:
    """Pass proportions from ``reps`` simulated tests at each grid size, then a monotone fit.

    Every grid cell draws from its own substream, so results do not depend
    on ``workers``.
    """
    grid = np.asarray(sorted(set(int(n) for n in grid)), dtype=int)
    if grid.size == 0 or grid[0] < 1:
        raise DomainError("grid sizes must be at least 1")
    if reps < 1:
        raise DomainError("reps must be at least 1")
    stream = stream if stream is not None else RandomStream(0)
    tasks = [(config.for_size(int(n)), target, sampler, reps, stream) for n in grid]
    counts = _map(_cell_passes, tasks, workers)
    return fit_curve(grid, counts, reps)


@dataclass(frozen=True)
class WeibullSampleSize:
    reached: bool
    n: int | None
    assurance: float | None
    max_fitted: float


def find_min_n_weibull(curve: AssuranceCurve, gamma: float) -> WeibullSampleSize:
    """Smallest n whose step-interpolated fitted assurance is at least ``gamma``."""
    if not 0 <= gamma < 1:
        raise DomainError(f"gamma must lie in [0, 1), got {gamma}")
    top = float(curve.fitted.max())
    if gamma <= 0:
        return WeibullSampleSize(True, 1, float(curve(1)), top)
    hit = np.nonzero(curve.fitted >= gamma)[0]
    if hit.size == 0:
        return WeibullSampleSize(False, None, None, top)
    i = int(hit[0])
    return WeibullSampleSize(True, int(curve.grid[i]), float(curve.fitted[i]), top)


# ---------------------------------------------------------------------------
# Two stress groups
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RankedDesign:
    n_a: int
    n_b: int
    total: int
    assurance: float


@dataclass(frozen=True)
class AssuranceSurface:
    n_a: np.ndarray
    n_b: np.ndarray
    raw: np.ndarray
    reps: np.ndarray
    fitted: np.ndarray
    ranked: tuple

    def rows(self):
        for i, a in enumerate(self.n_a):
            for j, b in enumerate(self.n_b):
                yield int(a), int(b), float(self.raw[i, j]), float(self.fitted[i, j])


def rank_designs(n_a, n_b, fitted, gamma: float) -> tuple:
    """Cells with fitted assurance >= ``gamma``, smallest total first, then highest assurance."""
    out = [
        RankedDesign(int(a), int(b), int(a + b), float(fitted[i, j]))
        for i, a in enumerate(n_a)
        for j, b in enumerate(n_b)
        if fitted[i, j] >= gamma
    ]
    out.sort(key=lambda d: (d.total, -d.assurance, d.n_a))
    return tuple(out)


def assurance_surface(
    config: TestConfig,
    target: ReliableLifeTarget,
    sampler,
    stress_a: float,
    stress_b: float,
    n_a_grid: Sequence[int],
    n_b_grid: Sequence[int],
    reps: int = 20,
    gamma: float = 0.8,
    stream: RandomStream | None = None,
    workers: int = 1,
) -> AssuranceSurface:
    """Assurance over designs with ``n_a`` items at ``stress_a`` and ``n_b`` at ``stress_b``.

    The fitted surface is the weighted least-squares projection onto
    surfaces nondecreasing in both sizes.
    """
    n_a = np.asarray(sorted(set(int(v) for v in n_a_grid)), dtype=int)
    n_b = np.asarray(sorted(set(int(v) for v in n_b_grid)), dtype=int)
    if n_a.size == 0 or n_b.size == 0 or n_a[0] < 1 or n_b[0] < 1:
        raise DomainError("grid sizes must be at least 1")
    if reps < 1:
        raise DomainError("reps must be at least 1")
    stream = stream if stream is not None else RandomStream(0)
    tasks = [
        (config.with_groups([(stress_a, a), (stress_b, b)]), target, sampler, reps, stream)
        for a in n_a
        for b in n_b
    ]
    counts = np.asarray(_map(_cell_passes, tasks, workers), dtype=float).reshape(n_a.size, n_b.size)
    w = np.full(counts.shape, float(reps))
    raw = counts / w
    fitted = np.clip(isotonic.isotonic_fit_2d(raw, w), 0.0, 1.0)
    return AssuranceSurface(n_a, n_b, raw, w, fitted, rank_designs(n_a, n_b, fitted, gamma))


# ---------------------------------------------------------------------------
# Design distributions
# ---------------------------------------------------------------------------


def design_posterior(
    historical: LifetimeData,
    prior: WeibullPrior,
    settings: WeibullMCMCSettings | None = None,
    stream: RandomSource | None = None,
    k: float = 1.0,
):
    """Sampler of (alpha0, alpha1, beta, v_eps, fresh eps) given historical data.

    With no data the prior itself is returned. Data at a single stress
    cannot identify the slope, so it is rejected unless the prior fixes it.
    """
    if len(historical) == 0:
        return PriorSampler(prior)
    if np.unique(historical.stress).size < 2 and not prior.slope_fixed:
        raise IdentifiabilityError("historical data at a single stress cannot identify the link slope")
    settings = settings or WeibullMCMCSettings(iterations=20_000, burn_in=5_000)
    rng = as_generator(stream if stream is not None else RandomStream(0))
    x = np.asarray(link_transform(historical.stress, k), dtype=float)
    out = run_chains(
        np.log(historical.time)[None, :],
        (~historical.censored)[None, :],
        x,
        historical.location,
        historical.n_locations,
        prior,
        settings,
        rng,
        store=True,
    )
    acc = {key: float(val[0]) for key, val in out.acceptance.items()}
    return PosteriorSampler(
        out.draws["alpha0"][0], out.draws["alpha1"][0], out.draws["beta"][0], out.draws["v_eps"][0], acc
    )


def calibrate_sceptical_prior(
    prior: WeibullPrior,
    target: ReliableLifeTarget,
    prob: float = 0.1,
    k: float = 1.0,
    n_draws: int = 200_000,
    seed: int = 0,
) -> WeibullPrior:
    """Shift mu0 so that the prior gives Pr(tau_q >= tau_star) = ``prob`` at a new location."""
    if not 0 < prob < 1:
        raise DomainError(f"prob must lie in (0, 1), got {prob}")
    x_star = float(link_transform(target.s_star, k))

    def f(mu0):
        return prior_pass_probability(prior.with_mu0(mu0), target.q, target.tau_star, x_star, n_draws, seed) - prob

    lo, hi = prior.mu0 - 1.0, prior.mu0 + 1.0
    for _ in range(200):
        if f(lo) > 0 > f(hi):
            break
        lo, hi = lo - 2.0 * (prior.mu0 - lo + 1.0), hi + 2.0 * (hi - prior.mu0 + 1.0)
    else:
        raise InfeasibleError(f"no mu0 gives prior probability {prob}")
    return prior.with_mu0(optimize.brentq(f, lo, hi, xtol=1e-10))
