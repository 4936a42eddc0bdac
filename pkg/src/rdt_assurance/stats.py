"""Special functions, distribution helpers and reproducible random streams.

Everything numeric in the package funnels through here. Special functions are
thin, domain-checked wrappers over :mod:`scipy.special`; random draws come from
:class:`RandomStream`, a value type naming a counter-based (Philox) substream
so that work can be split across processes without changing results.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import special, stats

from .errors import DomainError

__all__ = [
    "RandomStream",
    "as_generator",
    "log_beta",
    "reg_inc_beta",
    "binom_pmf",
    "binom_logpmf",
    "binom_cdf",
    "normal_quantile",
    "student_t_quantile",
    "gamma_quantile",
    "sample_beta",
    "sample_gamma",
    "sample_normal",
    "sample_bvn",
    "sample_weibull",
    "sample_inverse_gamma",
]

_UINT64 = 2**64


@dataclass(frozen=True)
class RandomStream:
    """A named, reproducible source of random numbers.

    ``seed`` selects the experiment; ``key`` is a path of 64-bit stream ids.
    Two streams with equal ``(seed, key)`` yield identical draws on every
    platform, and streams with different keys are independent Philox
    substreams derived through :class:`numpy.random.SeedSequence`.
    """

    seed: int
    key: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= int(self.seed) < _UINT64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        for k in self.key:
            if not 0 <= int(k) < _UINT64:
                raise DomainError(f"stream id must be a 64-bit unsigned integer, got {k}")

    @property
    def stream_id(self) -> tuple[int, ...]:
        return self.key

    def child(self, *ids: int) -> "RandomStream":
        """Derive a substream; ``stream.child(3, 7)`` is cell 3, repeat 7."""
        return RandomStream(self.seed, self.key + tuple(int(i) for i in ids))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=self.key)
        return np.random.Generator(np.random.Philox(ss))


RandomSource = Union[RandomStream, np.random.Generator]


def as_generator(source: RandomSource) -> np.random.Generator:
    if isinstance(source, np.random.Generator):
        return source
    if isinstance(source, RandomStream):
        return source.generator()
    raise TypeError(f"expected RandomStream or numpy Generator, got {type(source).__name__}")


def _positive(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"{name} must be positive and finite, got {value!r}")
    return arr


def _scalar_or_array(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


# ---------------------------------------------------------------------------
# Special functions
# ---------------------------------------------------------------------------


def log_beta(a, b):
    """log B(a, b) for positive ``a`` and ``b`` (broadcasts)."""
    a = _positive("a", a)
    b = _positive("b", b)
    return _scalar_or_array(special.betaln(a, b))


def reg_inc_beta(x, a, b):
    """Regularized incomplete beta function I_x(a, b)."""
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any((x < 0) | (x > 1)):
        raise DomainError(f"x must lie in [0, 1], got {x!r}")
    a = _positive("a", a)
    b = _positive("b", b)
    return _scalar_or_array(special.betainc(a, b, x))


def _check_counts(y, n):
    y = np.asarray(y)
    n = np.asarray(n)
    if np.any(n < 0) or np.any(y > n):
        raise DomainError(f"need 0 <= y <= n, got y={y!r}, n={n!r}")
    return y, n


def _check_prob(name, p):
    p = np.asarray(p, dtype=float)
    if np.any(~np.isfinite(p)) or np.any((p < 0) | (p > 1)):
        raise DomainError(f"{name} must lie in [0, 1], got {p!r}")
    return p


def binom_logpmf(y, n, theta):
    """Log binomial mass for ``y`` events in ``n`` trials of probability ``theta``."""
    y, n = _check_counts(y, n)
    if np.any(y < 0):
        raise DomainError(f"y must be non-negative, got {y!r}")
    theta = _check_prob("theta", theta)
    return _scalar_or_array(stats.binom.logpmf(y, n, theta))


def binom_pmf(y, n, theta):
    """Binomial mass, evaluated in log space so it does not underflow early."""
    return _scalar_or_array(np.exp(binom_logpmf(y, n, theta)))


def binom_cdf(y, n, theta):
    """Pr(Y <= y) for Y ~ bin(n, theta).

    ``y = -1`` is allowed and gives 0, which is how a plan with no passing
    outcome is priced everywhere in the package.
    """
    y, n = _check_counts(y, n)
    if np.any(y < -1):
        raise DomainError(f"y must be >= -1, got {y!r}")
    theta = _check_prob("theta", theta)
    out = np.where(y < 0, 0.0, special.bdtr(np.maximum(y, 0), n, theta))
    return _scalar_or_array(out)


def _check_open_prob(p):
    p = np.asarray(p, dtype=float)
    if np.any(~np.isfinite(p)) or np.any((p <= 0) | (p >= 1)):
        raise DomainError(f"probability must lie in (0, 1), got {p!r}")
    return p


def normal_quantile(p):
    return _scalar_or_array(special.ndtri(_check_open_prob(p)))


def student_t_quantile(p, df):
    p = _check_open_prob(p)
    df = _positive("df", df)
    return _scalar_or_array(stats.t.ppf(p, df))


def gamma_quantile(p, shape, rate):
    """Quantile of gamma(shape, rate), mean shape / rate."""
    p = _check_open_prob(p)
    shape = _positive("shape", shape)
    rate = _positive("rate", rate)
    return _scalar_or_array(special.gammaincinv(shape, p) / rate)


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------


def sample_beta(source: RandomSource, a, b, size=None):
    a = _positive("a", a)
    b = _positive("b", b)
    return as_generator(source).beta(a, b, size=size)


def sample_gamma(source: RandomSource, shape, rate, size=None):
    """gamma(shape, rate) draws; mean shape / rate."""
    shape = _positive("shape", shape)
    rate = _positive("rate", rate)
    return as_generator(source).gamma(shape, 1.0 / rate, size=size)


def sample_inverse_gamma(source: RandomSource, shape, rate, size=None):
    """Draws of v where 1 / v ~ gamma(shape, rate)."""
    return 1.0 / sample_gamma(source, shape, rate, size=size)


def sample_normal(source: RandomSource, mean=0.0, var=1.0, size=None):
    var = np.asarray(var, dtype=float)
    if np.any(var < 0):
        raise DomainError(f"variance must be non-negative, got {var!r}")
    return as_generator(source).normal(mean, np.sqrt(var), size=size)


def _psd_factor(cov: np.ndarray) -> np.ndarray:
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (2, 2) or not np.allclose(cov, cov.T):
        raise DomainError("covariance must be a symmetric 2x2 matrix")
    w, v = np.linalg.eigh(cov)
    if w[0] < -1e-12 * max(1.0, abs(w[1])):
        raise DomainError(f"covariance is not positive semi-definite (eigenvalue {w[0]:.3g})")
    return v * np.sqrt(np.clip(w, 0.0, None))


def sample_bvn(source: RandomSource, mean, cov, size: int | None = None) -> np.ndarray:
    """Bivariate normal draws with shape ``(size, 2)`` (or ``(2,)``).

    A singular covariance is accepted and gives draws on a line or a point;
    that is how point-mass priors are represented.
    """
    factor = _psd_factor(cov)
    mean = np.asarray(mean, dtype=float)
    z = as_generator(source).standard_normal((1 if size is None else size, 2))
    out = mean + z @ factor.T
    return out[0] if size is None else out


def sample_weibull(source: RandomSource, rate, shape, size=None):
    """Weibull lifetimes by inversion, t = (-log U)^(1/shape) / rate."""
    rate = _positive("rate", rate)
    shape = _positive("shape", shape)
    u = as_generator(source).random(size=size if size is not None else np.broadcast(rate, shape).shape)
    return (-np.log1p(-u)) ** (1.0 / shape) / rate
