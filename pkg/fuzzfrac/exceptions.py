"""Exceptions raised by fuzzfrac."""
from __future__ import annotations


class FuzzFracError(Exception):
    """Base exception for fuzzfrac errors."""


class InvalidFuzzyNumber(FuzzFracError, ValueError):
    """Endpoint data does not describe a fuzzy number."""


class MonotonicityViolation(InvalidFuzzyNumber):
    """An endpoint function runs the wrong way in alpha."""

    def __init__(self, side: str, index: int, gap: float) -> None:
        super().__init__(
            f"{side} endpoint not monotone at alpha index {index} (gap {gap:.3e})"
        )
        self.side = side
        self.index = index
        self.gap = gap


class CrossingViolation(InvalidFuzzyNumber):
    """The 1-level lower endpoint exceeds the upper endpoint."""

    def __init__(self, lower: float, upper: float) -> None:
        super().__init__(f"lower(1)={lower!r} exceeds upper(1)={upper!r}")
        self.lower = lower
        self.upper = upper


class NonFinite(InvalidFuzzyNumber):
    """NaN or infinity where a finite real is required."""


class InvalidOrdering(InvalidFuzzyNumber):
    """Triangular parameters are not ordered a <= b <= c."""


class GridMismatch(FuzzFracError, ValueError):
    """Operands live on different alpha grids."""


class DomainError(FuzzFracError, ValueError):
    """Argument outside the domain of a function or operator."""


class UnsupportedExponent(FuzzFracError, ValueError):
    """Power exponent below q - 1, outside the supported calculus."""

    def __init__(self, exponent: float, q: float) -> None:
        super().__init__(
            f"exponent {exponent!r} is below q-1={q - 1.0!r}; "
            "only exponents p >= q-1 are supported"
        )
        self.exponent = exponent
        self.q = q


class KernelSignError(FuzzFracError, ValueError):
    """The Volterra kernel is negative somewhere on [0, t]."""

    def __init__(self, t: float, s: float | None, value: float) -> None:
        if s is None:
            message = f"kernel integral at t={t!r} is {value!r}, so k(t, .) is negative somewhere"
        else:
            message = f"kernel k({t!r}, {s!r}) = {value!r} is negative"
        super().__init__(message)
        self.t = t
        self.s = s
        self.value = value


class ProblemFormatError(FuzzFracError, ValueError):
    """A problem, solution or fuzzy-number document could not be parsed."""

    def __init__(
        self,
        message: str,
        *,
        source: str | None = None,
        line: int | None = None,
        column: int | None = None,
        path: str | None = None,
    ) -> None:
        location = source or "<input>"
        if line is not None:
            location = f"{location}:{line}:{column or 0}"
        if path:
            location = f"{location} at {path}"
        super().__init__(f"{location}: {message}")
        self.source = source
        self.line = line
        self.column = column
        self.path = path
