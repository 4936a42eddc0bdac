"""Exception hierarchy shared by every module in the package."""


class RDTError(Exception):
    """Base class for package errors."""


class DomainError(RDTError, ValueError):
    """An argument lies outside the domain of the function."""


class IncoherenceError(RDTError, ValueError):
    """Expert judgements or data that cannot come from any valid model."""


class InfeasibleError(RDTError):
    """No parameter value satisfies the requested constraints."""


class InitializationError(RDTError):
    """An MCMC chain could not be started from a finite log-posterior."""


class IdentifiabilityError(RDTError, ValueError):
    """Data cannot identify a model parameter (e.g. one stress level only)."""
