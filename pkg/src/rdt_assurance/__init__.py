"""Bayesian assurance and sample-size design for reliability demonstration tests.

Submodules
----------
stats        special functions, distributions and reproducible random streams
binomial     cut-off rules and assurance for failure-on-demand tests
risk         classical, average and posterior producer's / consumer's risks
weibull      Weibull time-to-failure tests with accelerated stresses
elicitation  prior hyper-parameters from expert quantile judgements
isotonic     monotone least-squares fits for assurance curves and surfaces
cli          the ``rdt-assure`` command
"""

from . import binomial, elicitation, isotonic, risk, stats, weibull
from .errors import (
    DomainError,
    IdentifiabilityError,
    IncoherenceError,
    InfeasibleError,
    InitializationError,
    RDTError,
)
from .stats import RandomStream

__version__ = "0.1.0"

__all__ = [
    "binomial",
    "elicitation",
    "isotonic",
    "risk",
    "stats",
    "weibull",
    "RandomStream",
    "RDTError",
    "DomainError",
    "IncoherenceError",
    "InfeasibleError",
    "InitializationError",
    "IdentifiabilityError",
]
