"""Fuzzy arithmetic, fractional calculus and verification."""

from .fracalc import FuzzyPowerFunc, Kernel, constant, power
from .fuzzy import AlphaGrid, FuzzyNumber, crisp, triangular, zero_hat
from .verifier import IVPProblem, VerificationConfig, VerificationReport, verify_solution

__all__ = [
    "AlphaGrid",
    "FuzzyNumber",
    "FuzzyPowerFunc",
    "IVPProblem",
    "Kernel",
    "VerificationConfig",
    "VerificationReport",
    "constant",
    "crisp",
    "power",
    "triangular",
    "verify_solution",
    "zero_hat",
]
