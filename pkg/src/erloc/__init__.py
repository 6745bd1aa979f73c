"""Numerical laboratory for eigenvector localization in critical Erdős–Rényi graphs."""

__version__ = "0.1.0"

from .errors import (ConfigError, ContractError, DegenerateSupportError, DomainError,
                     ErlocError, NumericError, ParameterError)
from .graph import generate_er, from_edges, build_scaled_matrix, normalized_degrees
from .pruning import prune, verify_pruning
from .spectra import eig_sym

__all__ = [
    "__version__",
    "ErlocError", "ParameterError", "DomainError", "ContractError",
    "DegenerateSupportError", "NumericError", "ConfigError",
    "generate_er", "from_edges", "build_scaled_matrix", "normalized_degrees",
    "prune", "verify_pruning", "eig_sym",
]
