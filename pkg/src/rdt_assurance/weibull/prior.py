"""Priors on the Weibull regression and samplers of design parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import ndtr

from .. import stats
from ..errors import DomainError
from ..stats import RandomSource, as_generator


@dataclass(frozen=True)
class WeibullPrior:
    """(alpha0, alpha1) ~ BVN(mu, Sigma), beta ~ gamma(a_beta, b_beta), eps_i ~ N(0, v_eps).

    The location variance is either fixed (``v_eps``) or given a prior
    through 1 / v_eps ~ gamma(a_eps, b_eps). ``beta_fixed`` replaces the
    gamma prior by a point mass. A covariance of zero in the slope (or in
    both coefficients) fixes those coefficients; any other singular
    covariance is rejected.
    """

    mu0: float
    mu1: float
    s00: float
    s11: float
    s01: float = 0.0
    a_beta: float = 1.0
    b_beta: float = 1.0
    v_eps: float | None = None
    a_eps: float | None = None
    b_eps: float | None = None
    beta_fixed: float | None = None

    def __post_init__(self):
        cov = self.cov
        w = np.linalg.eigvalsh(cov)
        if w[0] < -1e-12 * max(1.0, abs(w[1])):
            raise DomainError("coefficient covariance must be positive semi-definite")
        if w[0] <= 0 and not self.slope_fixed:
            raise DomainError("a singular coefficient covariance is only supported with a fixed slope")
        if self.beta_fixed is None:
            if not (self.a_beta > 0 and self.b_beta > 0):
                raise DomainError("a_beta and b_beta must be positive")
        elif not self.beta_fixed > 0:
            raise DomainError("beta_fixed must be positive")
        hier = self.a_eps is not None or self.b_eps is not None
        if hier == (self.v_eps is not None):
            raise DomainError("give either v_eps or (a_eps, b_eps)")
        if hier and not (self.a_eps and self.b_eps and self.a_eps > 0 and self.b_eps > 0):
            raise DomainError("a_eps and b_eps must be positive")
        if not hier and self.v_eps < 0:
            raise DomainError("v_eps must be non-negative")

    @property
    def mean(self) -> np.ndarray:
        return np.array([self.mu0, self.mu1], dtype=float)

    @property
    def cov(self) -> np.ndarray:
        return np.array([[self.s00, self.s01], [self.s01, self.s11]], dtype=float)

    @property
    def slope_fixed(self) -> bool:
        return self.s11 == 0 and self.s01 == 0

    @property
    def coefficients_fixed(self) -> bool:
        return self.slope_fixed and self.s00 == 0

    @property
    def hierarchical(self) -> bool:
        return self.v_eps is None

    @property
    def point_mass(self) -> bool:
        """True when the prior fixes everything but the fresh location effect."""
        return self.coefficients_fixed and self.beta_fixed is not None and not self.hierarchical

    def with_mu0(self, mu0: float) -> "WeibullPrior":
        return replace(self, mu0=float(mu0))

    def sample(self, source: RandomSource, size: int) -> "DesignDraws":
        rng = as_generator(source)
        ab = stats.sample_bvn(rng, self.mean, self.cov, size)
        if self.beta_fixed is None:
            beta = stats.sample_gamma(rng, self.a_beta, self.b_beta, size)
        else:
            beta = np.full(size, float(self.beta_fixed))
        if self.hierarchical:
            v = stats.sample_inverse_gamma(rng, self.a_eps, self.b_eps, size)
        else:
            v = np.full(size, float(self.v_eps))
        eps = rng.standard_normal(size) * np.sqrt(v)
        return DesignDraws(ab[:, 0], ab[:, 1], beta, v, eps)


@dataclass(frozen=True)
class DesignDraws:
    """Parameter draws for a new location: coefficients, shape, variance, fresh effect."""

    alpha0: np.ndarray
    alpha1: np.ndarray
    beta: np.ndarray
    v_eps: np.ndarray
    eps: np.ndarray

    def __len__(self) -> int:
        return int(self.beta.shape[0])

    def log_rate(self, x) -> np.ndarray:
        """log rho per draw (rows) and covariate value (columns)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return (self.alpha0 + self.eps)[:, None] + self.alpha1[:, None] * x[None, :]


@dataclass(frozen=True)
class PriorSampler:
    """Design sampler drawing straight from a prior."""

    prior: WeibullPrior

    def draw(self, source: RandomSource, size: int) -> DesignDraws:
        return self.prior.sample(source, size)


@dataclass(frozen=True)
class PosteriorSampler:
    """Design sampler resampling retained MCMC draws.

    Each call picks stored draws uniformly with replacement and attaches a
    fresh location effect eps ~ N(0, v_eps) for the new test location.
    """

    alpha0: np.ndarray
    alpha1: np.ndarray
    beta: np.ndarray
    v_eps: np.ndarray
    acceptance: dict

    def __len__(self) -> int:
        return int(self.beta.shape[0])

    def draw(self, source: RandomSource, size: int) -> DesignDraws:
        rng = as_generator(source)
        idx = rng.integers(0, len(self), size)
        v = self.v_eps[idx]
        eps = rng.standard_normal(size) * np.sqrt(v)
        return DesignDraws(self.alpha0[idx], self.alpha1[idx], self.beta[idx], v, eps)

    def summary(self) -> dict[str, tuple[float, float]]:
        return {
            name: (float(np.mean(getattr(self, name))), float(np.std(getattr(self, name), ddof=1)))
            for name in ("alpha0", "alpha1", "beta", "v_eps")
        }


def prior_pass_probability(
    prior: WeibullPrior, q: float, tau_star: float, x_star: float, n_draws: int = 200_000, seed: int = 0
) -> float:
    """Pr(tau_q >= tau_star) under the prior for a new location.

    tau_q >= tau_star exactly when alpha0 + alpha1 x* + eps <= log(-log q) / beta - log tau*,
    and the left side is normal given v_eps, so only (beta, v_eps) are
    averaged by Monte Carlo (with a fixed stream, so the result is smooth
    in mu0).
    """
    rng = stats.RandomStream(seed).generator()
    if prior.beta_fixed is None:
        beta = stats.sample_gamma(rng, prior.a_beta, prior.b_beta, n_draws)
    else:
        beta = np.full(n_draws, float(prior.beta_fixed))
    if prior.hierarchical:
        v = stats.sample_inverse_gamma(rng, prior.a_eps, prior.b_eps, n_draws)
    else:
        v = np.full(n_draws, float(prior.v_eps))
    h = np.log(-math.log(q)) / beta - math.log(tau_star)
    m = prior.mu0 + prior.mu1 * x_star
    s2 = prior.s00 + 2 * x_star * prior.s01 + x_star**2 * prior.s11 + v
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(s2 > 0, (h - m) / np.sqrt(s2), np.where(h >= m, np.inf, -np.inf))
    return float(np.mean(ndtr(z)))
