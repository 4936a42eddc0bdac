"""Metropolis-within-Gibbs for the Weibull regression, run on many datasets at once.

All chains in a batch share the test layout (covariates and locations) but
each has its own lifetimes, so every array carries a leading batch axis B.
One sweep updates, for every chain simultaneously,

1. (alpha0, alpha1) jointly by a Gaussian random walk,
2. log beta by a scalar random walk,
3. every location effect eps_i by independent scalar walks,
4. v_eps from its gamma full conditional (when it is not fixed).

The coefficients are sampled as (alpha0 + alpha1 * xbar, alpha1), which
removes most of their posterior correlation. Proposal scales adapt during
burn-in only and are frozen afterwards, so the retained draws come from a
time-homogeneous kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ..errors import DomainError, InitializationError
from .prior import WeibullPrior

_RW_SCALE_2D = 2.38**2 / 2.0


@dataclass(frozen=True)
class WeibullMCMCSettings:
    """Chain length and adaptation controls.

    The defaults (2,000 retained draws after 500 burn-in) are sized for the
    pass indicator of one simulated test; final analyses should use longer
    chains.
    """

    iterations: int = 2500
    burn_in: int = 500
    thin: int = 1
    target_accept: float = 0.3
    adapt_window: int = 50

    def __post_init__(self):
        if not self.iterations > self.burn_in >= 0:
            raise DomainError(f"need iterations > burn_in >= 0, got {self.iterations}, {self.burn_in}")
        if self.thin < 1 or self.adapt_window < 1:
            raise DomainError("thin and adapt_window must be at least 1")
        if not 0 < self.target_accept < 1:
            raise DomainError("target_accept must lie in (0, 1)")

    @property
    def n_kept(self) -> int:
        return len(range(self.burn_in, self.iterations, self.thin))


@dataclass(frozen=True)
class Prediction:
    """Reliable-life event tau_q >= tau_star at covariate x_star for a new location."""

    x_star: float
    log_neg_log_q: float
    log_tau_star: float

    def holds(self, alpha0, alpha1, beta, eps_new):
        return alpha0 + alpha1 * self.x_star + eps_new <= self.log_neg_log_q / beta - self.log_tau_star


@dataclass
class ChainOutput:
    r_q: np.ndarray | None
    draws: dict | None
    acceptance: dict
    acceptance_halves: dict


def v_eps_full_conditional(eps, a_eps: float, b_eps: float) -> tuple[np.ndarray, np.ndarray]:
    """(shape, rate) of the gamma full conditional of 1 / v_eps given effects ``eps``.

    ``eps`` has shape (..., L); the result is gamma(a + L/2, b + sum(eps^2)/2).
    """
    eps = np.asarray(eps, dtype=float)
    L = eps.shape[-1]
    return np.full(eps.shape[:-1], a_eps + L / 2.0), b_eps + 0.5 * np.sum(eps**2, axis=-1)


class _Layout:
    """Prior pieces expressed on the centred coefficients (c0, c1)."""

    def __init__(self, prior: WeibullPrior, xbar: float):
        A = np.array([[1.0, xbar], [0.0, 1.0]])
        self.A = A
        self.mean = A @ prior.mean
        cov = A @ prior.cov @ A.T
        if prior.coefficients_fixed:
            self.free = np.array([False, False])
        elif prior.slope_fixed:
            self.free = np.array([True, False])
        else:
            self.free = np.array([True, True])
        prec = np.zeros((2, 2))
        idx = np.nonzero(self.free)[0]
        if idx.size:
            prec[np.ix_(idx, idx)] = np.linalg.inv(cov[np.ix_(idx, idx)])
        self.prec = prec

    def logprior(self, c: np.ndarray) -> np.ndarray:
        d = c - self.mean
        return -0.5 * np.einsum("bi,ij,bj->b", d, self.prec, d)


def run_chains(
    logt: np.ndarray,
    fail: np.ndarray,
    x: np.ndarray,
    loc: np.ndarray,
    n_loc: int,
    prior: WeibullPrior,
    settings: WeibullMCMCSettings,
    rng: np.random.Generator,
    predict: Prediction | None = None,
    store: bool = False,
) -> ChainOutput:
    """Run B chains, one per row of ``logt`` / ``fail``.

    Parameters
    ----------
    logt, fail : (B, n) arrays
        Log recorded times and failure flags (False means right-censored).
    x : (n,) array
        Link covariate s**k of each item, shared by all chains.
    loc : (n,) int array
        Location code of each item in 0..n_loc-1.
    predict : Prediction, optional
        When given, ``r_q`` holds the per-chain fraction of retained draws
        for which the reliable-life event holds, each with a fresh location
        effect.
    store : bool
        Keep the retained (alpha0, alpha1, beta, v_eps) draws.
    """
    logt = np.atleast_2d(np.asarray(logt, dtype=float))
    fail = np.atleast_2d(np.asarray(fail, dtype=bool))
    B, n = logt.shape
    x = np.asarray(x, dtype=float)
    loc = np.asarray(loc, dtype=int)
    if fail.shape != (B, n) or x.shape != (n,) or loc.shape != (n,):
        raise DomainError("inconsistent data shapes for the sampler")
    if n == 0:
        raise DomainError("run_chains needs at least one observation; sample the prior directly")
    xbar = float(x.mean())
    xc = x - xbar
    lay = _Layout(prior, xbar)
    failf = fail.astype(float)
    onehot = np.zeros((n, n_loc))
    onehot[np.arange(n), loc] = 1.0

    update_beta = prior.beta_fixed is None
    fixed_v = None if prior.hierarchical else float(prior.v_eps)
    update_eps = fixed_v is None or fixed_v > 0

    # starting values
    if update_beta:
        beta0 = prior.a_beta / prior.b_beta
    else:
        beta0 = float(prior.beta_fixed)
    if prior.hierarchical:
        v0 = prior.b_eps / (prior.a_eps - 1.0) if prior.a_eps > 1 else prior.b_eps / prior.a_eps
    else:
        v0 = fixed_v
    d = failf.sum(axis=1)
    d_eff = np.maximum(d, 1.0)
    c = np.tile(lay.mean, (B, 1))
    if lay.free[0]:
        # rate that makes the expected number of failures match the observed count
        c0_data = (np.log(np.maximum(d, 0.5)) - logsumexp(beta0 * (c[:, 1:2] * xc + logt), axis=1)) / beta0
        p_data = beta0**2 * d_eff
        p_prior = lay.prec[0, 0]
        c[:, 0] = (p_data * c0_data + p_prior * lay.mean[0]) / (p_data + p_prior)
    logb = np.full(B, math.log(beta0))
    eps = np.zeros((B, n_loc))
    v = np.full(B, v0)

    def item_ll(c, logb, eps):
        beta = np.exp(logb)[:, None]
        z = c[:, 0:1] + c[:, 1:2] * xc + eps[:, loc] + logt
        with np.errstate(over="ignore"):
            u = np.exp(beta * z)
        return failf * (logb[:, None] + beta * z) - u

    def logprior_beta(logb):
        if not update_beta:
            return np.zeros(B)
        return prior.a_beta * logb - prior.b_beta * np.exp(logb)

    ll = item_ll(c, logb, eps)
    start = ll.sum(axis=1) + lay.logprior(c) + logprior_beta(logb)
    if not np.all(np.isfinite(start)):
        raise InitializationError("log-posterior is not finite at the starting values")

    # initial proposal scales from a crude information approximation
    info = np.zeros((B, 2, 2))
    info[:, 0, 0] = beta0**2 * d_eff
    info[:, 1, 1] = beta0**2 * np.maximum((failf * xc**2).sum(axis=1), 1e-8)
    info += lay.prec
    for j in range(2):
        if not lay.free[j]:
            info[:, j, :] = 0.0
            info[:, :, j] = 0.0
            info[:, j, j] = 1.0
    shape_c = np.linalg.inv(info) * _RW_SCALE_2D
    mask_c = lay.free.astype(float)
    ls_c = np.zeros(B)
    sd_b = 2.38 / np.sqrt(1.6 * d_eff + (prior.a_beta if update_beta else 1.0))
    d_loc = failf @ onehot
    sd_e = 2.38 / np.sqrt(beta0**2 * np.maximum(d_loc, 1.0) + 1.0 / max(v0, 1e-12))

    n_kept = settings.n_kept
    hits = np.zeros(B) if predict is not None else None
    draws = {k: np.empty((B, n_kept)) for k in ("alpha0", "alpha1", "beta", "v_eps")} if store else None
    acc_win = {"coef": np.zeros(B), "beta": np.zeros(B), "eps": np.zeros((B, n_loc))}
    acc_post = {"coef": np.zeros((B, 2)), "beta": np.zeros((B, 2)), "eps": np.zeros((B, 2))}
    emp_from = settings.burn_in // 4
    emp_switch = settings.burn_in // 2
    s1 = np.zeros((B, 2))
    s2 = np.zeros((B, 2, 2))
    n_emp = 0
    switched = False
    half = settings.burn_in + (settings.iterations - settings.burn_in) // 2
    kept = 0

    for it in range(settings.iterations):
        post_half = None if it < settings.burn_in else int(it >= half)

        # (alpha0, alpha1) in centred form
        if lay.free.any():
            chol = np.linalg.cholesky(shape_c)
            step = np.einsum("bij,bj->bi", chol, rng.standard_normal((B, 2))) * np.exp(ls_c)[:, None]
            c_new = c + step * mask_c
            ll_new = item_ll(c_new, logb, eps)
            log_r = ll_new.sum(axis=1) - ll.sum(axis=1) + lay.logprior(c_new) - lay.logprior(c)
            acc = np.log(rng.random(B)) < log_r
            c = np.where(acc[:, None], c_new, c)
            ll = np.where(acc[:, None], ll_new, ll)
            acc_win["coef"] += acc
            if post_half is not None:
                acc_post["coef"][:, post_half] += acc

        # log beta
        if update_beta:
            logb_new = logb + sd_b * rng.standard_normal(B)
            ll_new = item_ll(c, logb_new, eps)
            log_r = ll_new.sum(axis=1) - ll.sum(axis=1) + logprior_beta(logb_new) - logprior_beta(logb)
            acc = np.log(rng.random(B)) < log_r
            logb = np.where(acc, logb_new, logb)
            ll = np.where(acc[:, None], ll_new, ll)
            acc_win["beta"] += acc
            if post_half is not None:
                acc_post["beta"][:, post_half] += acc

        # location effects, all locations at once
        if update_eps:
            eps_new = eps + sd_e * rng.standard_normal((B, n_loc))
            ll_new = item_ll(c, logb, eps_new)
            log_r = (ll_new - ll) @ onehot - 0.5 * (eps_new**2 - eps**2) / v[:, None]
            acc = np.log(rng.random((B, n_loc))) < log_r
            eps = np.where(acc, eps_new, eps)
            ll = np.where(acc[:, loc], ll_new, ll)
            acc_win["eps"] += acc
            if post_half is not None:
                acc_post["eps"][:, post_half] += acc.mean(axis=1)

        # v_eps given the effects
        if fixed_v is None:
            shape, rate = v_eps_full_conditional(eps, prior.a_eps, prior.b_eps)
            v = 1.0 / rng.gamma(shape, 1.0 / rate)

        if it < settings.burn_in:
            if it >= emp_from:
                s1 += c
                s2 += c[:, :, None] * c[:, None, :]
                n_emp += 1
            if (it + 1) % settings.adapt_window == 0:
                w = settings.adapt_window
                t = settings.target_accept
                ls_c += 2.0 * (acc_win["coef"] / w - t)
                sd_b *= np.exp(2.0 * (acc_win["beta"] / w - t))
                sd_e *= np.exp(2.0 * (acc_win["eps"] / w - t))
                if it + 1 >= emp_switch and n_emp >= 2 * w and lay.free.any():
                    m = s1 / n_emp
                    emp = s2 / n_emp - m[:, :, None] * m[:, None, :]
                    emp = emp * (mask_c[:, None] * mask_c[None, :])
                    emp[:, ~lay.free, ~lay.free] = 1.0
                    ok = np.linalg.det(emp) > 0
                    if not switched:
                        ls_c = np.where(ok, 0.0, ls_c)
                        switched = True
                    shape_c = np.where(ok[:, None, None], emp * _RW_SCALE_2D, shape_c)
                for key in acc_win:
                    acc_win[key][...] = 0.0
            continue

        if (it - settings.burn_in) % settings.thin:
            continue
        alpha1 = c[:, 1]
        alpha0 = c[:, 0] - alpha1 * xbar
        beta = np.exp(logb)
        if predict is not None:
            eps_new = rng.standard_normal(B) * np.sqrt(v)
            hits += predict.holds(alpha0, alpha1, beta, eps_new)
        if store:
            draws["alpha0"][:, kept] = alpha0
            draws["alpha1"][:, kept] = alpha1
            draws["beta"][:, kept] = beta
            draws["v_eps"][:, kept] = v
        kept += 1

    n_post = settings.iterations - settings.burn_in
    halves = np.array([half - settings.burn_in, settings.iterations - half], dtype=float)
    acceptance = {k: a.sum(axis=1) / n_post for k, a in acc_post.items()}
    acceptance_halves = {k: a / halves for k, a in acc_post.items()}
    return ChainOutput(
        None if hits is None else hits / n_kept,
        draws,
        acceptance,
        acceptance_halves,
    )
