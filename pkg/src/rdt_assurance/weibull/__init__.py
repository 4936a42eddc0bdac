"""Weibull time-to-failure RDTs with accelerated stresses."""

from .design import (
    AssuranceCurve,
    AssuranceSurface,
    PassResult,
    RankedDesign,
    TestConfig,
    WeibullAssurance,
    WeibullSampleSize,
    analysis_posterior_prob,
    assurance_curve,
    assurance_naive,
    assurance_surface,
    calibrate_sceptical_prior,
    design_posterior,
    design_stream,
    find_min_n_weibull,
    fit_curve,
    make_grid,
    pass_test,
    passes,
    rank_designs,
    simulate_lifetimes,
)
from .mcmc import ChainOutput, Prediction, WeibullMCMCSettings, run_chains, v_eps_full_conditional
from .model import (
    LifetimeData,
    ReliableLifeTarget,
    WeibullModel,
    WeibullObservation,
    link_transform,
    reliable_life,
    simulate_observations,
    weibull_loglik,
    weibull_loglik_grad,
)
from .prior import DesignDraws, PosteriorSampler, PriorSampler, WeibullPrior, prior_pass_probability

WeibullDesignPrior = WeibullPrior
