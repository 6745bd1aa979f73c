"""Exception hierarchy shared by all modules."""


class ErlocError(Exception):
    """Base class for package errors."""


class ParameterError(ErlocError, ValueError):
    """An argument lies outside the range an operation accepts."""


class DomainError(ErlocError, ValueError):
    """A mathematical function was evaluated outside its domain."""


class ContractError(ErlocError, ValueError):
    """An input violates a structural precondition (symmetry, fork shape, ...)."""


class DegenerateSupportError(ErlocError, ValueError):
    """A localization profile cannot be built because a sphere is empty."""


class NumericError(ErlocError, ArithmeticError):
    """A numerical routine failed to reach its tolerance."""


class ConfigError(ParameterError):
    """Experiment configuration failed validation."""
