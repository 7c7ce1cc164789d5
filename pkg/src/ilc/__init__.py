"""Generalized diagonal Ising correlations C^-(N, t; lambda) and their Painleve VI connection constants."""
from .connection import ConnectionConstants, bigK, shat, sigma_of_lambda
from .correlators import CorrelatorRequest, CorrelatorValue, FredholmConfig, Method, evaluate
from .errors import ILCError

__all__ = [
    "ConnectionConstants",
    "CorrelatorRequest",
    "CorrelatorValue",
    "FredholmConfig",
    "ILCError",
    "Method",
    "bigK",
    "evaluate",
    "shat",
    "sigma_of_lambda",
]

__version__ = "0.1.0"
