"""Weibull lifetime model with a stress-life link and location effects.

An item at stress ``s`` in location ``i`` has Weibull lifetime with shape
``beta`` and rate

    rho = exp(alpha0 + alpha1 * s**k + eps_i)

so that R(t) = exp(-(rho t)^beta). Right-censored items contribute R(t)
to the likelihood instead of the density.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..errors import DomainError, IncoherenceError


def link_transform(stress, k: float = 1.0):
    """``s**k``, the covariate entering the link."""
    s = np.asarray(stress, dtype=float)
    if k != 1.0 and np.any(s <= 0):
        raise DomainError(f"stress must be positive when the link exponent is {k}")
    out = s if k == 1.0 else s**k
    return float(out) if out.ndim == 0 else out


def reliable_life(rho, beta, q):
    """tau_q = rho^-1 (-log q)^(1/beta): the time a fraction ``q`` survives beyond."""
    rho = np.asarray(rho, dtype=float)
    beta = np.asarray(beta, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any(rho <= 0) or np.any(beta <= 0):
        raise DomainError("rho and beta must be positive")
    if np.any(q <= 0) or np.any(q >= 1):
        raise DomainError(f"q must lie in (0, 1), got {q!r}")
    out = (-np.log(q)) ** (1.0 / beta) / rho
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class WeibullModel:
    """Parameter values of the model; ``eps`` maps location -> effect."""

    beta: float
    alpha0: float
    alpha1: float
    k: float = 1.0
    eps: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta}")

    def log_rate(self, stress, location=None):
        e = 0.0 if location is None else self.eps.get(location, 0.0)
        return self.alpha0 + self.alpha1 * link_transform(stress, self.k) + e

    def rate(self, stress, location=None):
        return np.exp(self.log_rate(stress, location))


@dataclass(frozen=True)
class ReliableLifeTarget:
    """Pass when Pr(tau_q >= tau_star at stress s_star) >= 1 - delta."""

    q: float
    tau_star: float
    s_star: float
    delta: float = 0.05

    def __post_init__(self):
        if not 0 < self.q < 1:
            raise DomainError(f"q must lie in (0, 1), got {self.q}")
        if not self.tau_star > 0:
            raise DomainError(f"tau_star must be positive, got {self.tau_star}")
        if not 0 < self.delta < 1:
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}")

    @property
    def log_tau_star(self) -> float:
        return math.log(self.tau_star)

    def threshold(self) -> float:
        return 1.0 - self.delta


@dataclass(frozen=True)
class WeibullObservation:
    location: object
    stress: float
    time: float
    censored: bool = False

    def __post_init__(self):
        if not self.time > 0:
            raise DomainError(f"lifetimes must be positive, got {self.time}")


@dataclass(frozen=True)
class LifetimeData:
    """Column view of a list of observations; locations are coded 0..L-1."""

    location: np.ndarray
    stress: np.ndarray
    time: np.ndarray
    censored: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        n = self.time.shape[0]
        for name in ("location", "stress", "censored"):
            if getattr(self, name).shape[0] != n:
                raise DomainError(f"column {name} has the wrong length")
        if np.any(~np.isfinite(self.time)) or np.any(self.time <= 0):
            raise IncoherenceError("lifetimes must be positive and finite")
        if np.any(~np.isfinite(self.stress)):
            raise IncoherenceError("stresses must be finite")

    def __len__(self) -> int:
        return int(self.time.shape[0])

    @property
    def n_locations(self) -> int:
        return len(self.labels)

    @property
    def n_failures(self) -> int:
        return int((~self.censored).sum())

    @classmethod
    def empty(cls) -> "LifetimeData":
        return cls(np.zeros(0, int), np.zeros(0), np.zeros(0), np.zeros(0, bool), ())

    @classmethod
    def from_observations(cls, observations: Iterable[WeibullObservation]) -> "LifetimeData":
        obs = list(observations)
        labels: list = []
        index: dict = {}
        codes = []
        for o in obs:
            if o.location not in index:
                index[o.location] = len(labels)
                labels.append(o.location)
            codes.append(index[o.location])
        return cls(
            np.asarray(codes, dtype=int),
            np.asarray([o.stress for o in obs], dtype=float),
            np.asarray([o.time for o in obs], dtype=float),
            np.asarray([bool(o.censored) for o in obs], dtype=bool),
            tuple(labels),
        )

    @classmethod
    def from_csv(cls, path, stress_offset: float = 0.0) -> "LifetimeData":
        """Read ``location,stress,time,censored`` rows (censored is 0 or 1).

        ``stress_offset`` is subtracted from every stress, which is how a
        caller rescales stress so that zero is a plausible value.
        """
        obs = []
        with open(Path(path), newline="") as fh:
            reader = csv.DictReader(fh)
            need = {"location", "stress", "time", "censored"}
            if reader.fieldnames is None or not need <= set(reader.fieldnames):
                raise IncoherenceError(f"{path}: header must contain {sorted(need)}")
            for line, row in enumerate(reader, start=2):
                try:
                    cens = int(row["censored"])
                    if cens not in (0, 1):
                        raise ValueError
                    time = float(row["time"])
                    stress = float(row["stress"]) - stress_offset
                except ValueError as exc:
                    raise IncoherenceError(f"{path}:{line}: malformed row {row}") from exc
                if not time > 0:
                    raise IncoherenceError(f"{path}:{line}: lifetime must be positive")
                obs.append(WeibullObservation(row["location"], stress, time, bool(cens)))
        return cls.from_observations(obs)

    def observations(self) -> list[WeibullObservation]:
        return [
            WeibullObservation(self.labels[c], float(s), float(t), bool(d))
            for c, s, t, d in zip(self.location, self.stress, self.time, self.censored)
        ]

    def group_medians(self) -> dict[float, float]:
        """Median recorded time per distinct stress (censoring ignored)."""
        return {float(s): float(np.median(self.time[self.stress == s])) for s in np.unique(self.stress)}


def _log_rates(data: LifetimeData, model: WeibullModel) -> np.ndarray:
    eps = np.array([model.eps.get(lab, 0.0) for lab in data.labels], dtype=float)
    x = link_transform(data.stress, model.k)
    return model.alpha0 + model.alpha1 * np.asarray(x) + (eps[data.location] if eps.size else 0.0)


def weibull_loglik(data: LifetimeData, model: WeibullModel) -> float:
    """Censored Weibull log-likelihood.

    Failures contribute log beta + beta log rho + (beta - 1) log t - (rho t)^beta;
    censored items contribute -(rho t)^beta.
    """
    if len(data) == 0:
        return 0.0
    b = model.beta
    log_rho = _log_rates(data, model)
    logt = np.log(data.time)
    u = np.exp(b * (log_rho + logt))
    fail = ~data.censored
    dens = np.where(fail, math.log(b) + b * log_rho + (b - 1.0) * logt, 0.0)
    return float(np.sum(dens - u))


def weibull_loglik_grad(data: LifetimeData, model: WeibullModel) -> np.ndarray:
    """Gradient of :func:`weibull_loglik` in (alpha0, alpha1, log beta)."""
    if len(data) == 0:
        return np.zeros(3)
    b = model.beta
    log_rho = _log_rates(data, model)
    x = np.asarray(link_transform(data.stress, model.k), dtype=float)
    z = log_rho + np.log(data.time)  # log(rho t)
    u = np.exp(b * z)
    d = (~data.censored).astype(float)
    d_eta = b * (d - u)
    d_logb = d * (1.0 + b * z) - b * u * z
    return np.array([d_eta.sum(), (x * d_eta).sum(), d_logb.sum()])


def simulate_observations(
    model: WeibullModel,
    stresses: Sequence[float],
    locations: Sequence,
    rng: np.random.Generator,
    censor_time: float | None = None,
) -> LifetimeData:
    """Lifetimes for items at ``stresses`` in ``locations`` (one entry per item).

    Location effects come from ``model.eps``; missing locations get 0.
    """
    if len(stresses) != len(locations):
        raise DomainError("need one location per item")
    obs = []
    for s, loc in zip(stresses, locations):
        rho = float(model.rate(s, loc))
        t = rng.standard_exponential() ** (1.0 / model.beta) / rho
        cens = censor_time is not None and t > censor_time
        obs.append(WeibullObservation(loc, float(s), min(t, censor_time) if cens else t, bool(cens)))
    return LifetimeData.from_observations(obs)
