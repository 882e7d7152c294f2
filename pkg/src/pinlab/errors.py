"""Exception hierarchy for pinlab."""


class PinlabError(Exception):
    """Base class for all library errors."""


class ParameterDomainError(PinlabError, ValueError):
    """A parameter lies outside the domain of the operation."""


class DensityOutOfRangeError(ParameterDomainError):
    """Requested contact density is not attainable by tilting the law."""


class MemoryBudgetError(PinlabError, MemoryError):
    """A table would exceed the configured size or memory cap."""

    def __init__(self, message, *, N=None, cap=None, nbytes=None):
        super().__init__(message)
        self.N = N
        self.cap = cap
        self.nbytes = nbytes


class FitWindowError(PinlabError, ValueError):
    """An exponent fit window is not reachable for the given law."""


class LawInvariantError(PinlabError, ValueError):
    """An inter-arrival law violates one of its invariants."""


class ConfigError(PinlabError, ValueError):
    """Invalid experiment configuration. `path` names the offending field."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
