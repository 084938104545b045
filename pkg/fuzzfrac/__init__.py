"""Fuzzy fractional initial value problems: levelwise arithmetic and solution checks."""
from __future__ import annotations

import logging

from .const import VERSION

__version__ = VERSION

logging.getLogger(__name__).addHandler(logging.NullHandler())

from .analysis import (  # noqa: E402
    AlphaGrid,
    FuzzyNumber,
    FuzzyPowerFunc,
    IVPProblem,
    VerificationConfig,
    VerificationReport,
    crisp,
    triangular,
    verify_solution,
    zero_hat,
)
from .exceptions import FuzzFracError  # noqa: E402

__all__ = [
    "AlphaGrid",
    "FuzzFracError",
    "FuzzyNumber",
    "FuzzyPowerFunc",
    "IVPProblem",
    "VerificationConfig",
    "VerificationReport",
    "__version__",
    "crisp",
    "triangular",
    "verify_solution",
    "zero_hat",
]
