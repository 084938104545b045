"""Fuzzy numbers in L-U (parametric) form on a uniform alpha grid.

A fuzzy number is stored as two endpoint arrays sampled at alpha_j = j/M.
Values between grid levels follow linear interpolation, so triangular and
crisp numbers are represented exactly and the continuity conditions of the
parametric form hold automatically.

Every arithmetic operation here is levelwise interval arithmetic. There is
deliberately no subtraction: a non-crisp fuzzy number has no additive
inverse, and ``x + (-1)*x`` is a fuzzy number of width ``2*width(x, 0)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
import logging
import math
from typing import Optional

import numpy as np

from ..const import (
    COMPARISON_TOL,
    DEFAULT_ALPHA_LEVELS,
    SIDE_LOWER,
    SIDE_UPPER,
)
from ..exceptions import (
    CrossingViolation,
    DomainError,
    GridMismatch,
    InvalidFuzzyNumber,
    InvalidOrdering,
    MonotonicityViolation,
    NonFinite,
)

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class AlphaGrid:
    """Uniform grid of alpha levels 0 = alpha_0 < ... < alpha_M = 1."""

    level_count: int = DEFAULT_ALPHA_LEVELS

    def __post_init__(self) -> None:
        if int(self.level_count) != self.level_count or self.level_count < 2:
            raise DomainError(
                f"an alpha grid needs at least 2 levels, got {self.level_count!r}"
            )

    @property
    def m(self) -> int:
        """Number of subintervals M."""
        return self.level_count - 1

    @cached_property
    def levels(self) -> np.ndarray:
        levels = np.arange(self.level_count, dtype=float) / self.m
        levels.setflags(write=False)
        return levels


@dataclass(frozen=True)
class OrderViolation:
    """First level at which an ordering fails."""

    index: int
    alpha: float
    side: str
    gap: float


@dataclass(frozen=True)
class OrderVerdict:
    """Outcome of a levelwise comparison x <= y."""

    holds: bool
    first_violation: Optional[OrderViolation] = None

    def __post_init__(self) -> None:
        if self.holds != (self.first_violation is None):
            raise ValueError("holds must be True exactly when no violation is recorded")


def _check_endpoints(grid: AlphaGrid, lower: np.ndarray, upper: np.ndarray) -> None:
    if lower.shape != (grid.level_count,) or upper.shape != (grid.level_count,):
        raise InvalidFuzzyNumber(
            f"expected {grid.level_count} levels per endpoint, "
            f"got {lower.shape} and {upper.shape}"
        )
    if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
        raise NonFinite("endpoint arrays must be finite")

    steps = np.diff(lower)
    bad = np.flatnonzero(steps < -COMPARISON_TOL)
    if bad.size:
        raise MonotonicityViolation(SIDE_LOWER, int(bad[0]) + 1, float(-steps[bad[0]]))

    steps = np.diff(upper)
    bad = np.flatnonzero(steps > COMPARISON_TOL)
    if bad.size:
        raise MonotonicityViolation(SIDE_UPPER, int(bad[0]) + 1, float(steps[bad[0]]))

    if lower[-1] > upper[-1] + COMPARISON_TOL:
        raise CrossingViolation(float(lower[-1]), float(upper[-1]))


@dataclass(frozen=True, eq=False)
class FuzzyNumber:
    """Immutable fuzzy number [x]^alpha = [lower(alpha), upper(alpha)]."""

    grid: AlphaGrid
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        lower = np.array(self.lower, dtype=float)
        upper = np.array(self.upper, dtype=float)
        _check_endpoints(self.grid, lower, upper)
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    def level(self, alpha: float) -> tuple[float, float]:
        """Return the alpha-level interval, interpolating between grid levels."""
        if not 0.0 <= alpha <= 1.0:
            raise DomainError(f"alpha must lie in [0, 1], got {alpha!r}")
        position = alpha * self.grid.m
        if float(position).is_integer():
            j = int(position)
            return float(self.lower[j]), float(self.upper[j])
        levels = self.grid.levels
        return (
            float(np.interp(alpha, levels, self.lower)),
            float(np.interp(alpha, levels, self.upper)),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FuzzyNumber):
            return NotImplemented
        return (
            self.grid == other.grid
            and np.array_equal(self.lower, other.lower)
            and np.array_equal(self.upper, other.upper)
        )

    __hash__ = None  # type: ignore[assignment]

    def __add__(self, other: "FuzzyNumber") -> "FuzzyNumber":
        if not isinstance(other, FuzzyNumber):
            return NotImplemented
        return add(self, other)

    def __mul__(self, factor: float) -> "FuzzyNumber":
        if isinstance(factor, FuzzyNumber):
            return NotImplemented
        return scalar_mul(float(factor), self)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return (
            f"FuzzyNumber(levels={self.grid.level_count}, "
            f"support=[{self.lower[0]!r}, {self.upper[0]!r}], "
            f"core=[{self.lower[-1]!r}, {self.upper[-1]!r}])"
        )


@dataclass(frozen=True)
class RepairResult:
    """Fuzzy number produced by :func:`repair` and whether data changed."""

    number: FuzzyNumber
    changed: bool


def _grid_or_default(grid: AlphaGrid | None) -> AlphaGrid:
    return grid if grid is not None else AlphaGrid()


def _same_grid(x: FuzzyNumber, y: FuzzyNumber) -> None:
    if x.grid != y.grid:
        raise GridMismatch(
            f"alpha grids differ: {x.grid.level_count} vs {y.grid.level_count} levels"
        )


def from_levels(grid: AlphaGrid, lower, upper) -> FuzzyNumber:
    """Build a validated fuzzy number from endpoint samples."""
    return FuzzyNumber(grid, np.asarray(lower, dtype=float), np.asarray(upper, dtype=float))


def triangular(a: float, b: float, c: float, grid: AlphaGrid | None = None) -> FuzzyNumber:
    """Triangular fuzzy number (a, b, c): support [a, c], core {b}."""
    if not all(math.isfinite(v) for v in (a, b, c)):
        raise NonFinite(f"triangular parameters must be finite, got {(a, b, c)!r}")
    if a > b or b > c:
        raise InvalidOrdering(f"triangular parameters need a <= b <= c, got {(a, b, c)!r}")
    grid = _grid_or_default(grid)
    alphas = grid.levels
    # Clamped so the core is hit exactly despite rounding in a + alpha*(b - a).
    lower = np.minimum(a + alphas * (b - a), b)
    upper = np.maximum(c - alphas * (c - b), b)
    lower[0], lower[-1] = a, b
    upper[0], upper[-1] = c, b
    return FuzzyNumber(grid, lower, upper)


def crisp(r: float, grid: AlphaGrid | None = None) -> FuzzyNumber:
    """Embed the real number r as a fuzzy number."""
    if not math.isfinite(r):
        raise NonFinite(f"crisp value must be finite, got {r!r}")
    grid = _grid_or_default(grid)
    values = np.full(grid.level_count, float(r))
    return FuzzyNumber(grid, values, values)


def zero_hat(grid: AlphaGrid | None = None) -> FuzzyNumber:
    """The neutral element of fuzzy addition."""
    return crisp(0.0, grid)


def add(x: FuzzyNumber, y: FuzzyNumber) -> FuzzyNumber:
    """Levelwise sum [x_l + y_l, x_r + y_r]."""
    _same_grid(x, y)
    return FuzzyNumber(x.grid, x.lower + y.lower, x.upper + y.upper)


def scalar_mul(lam: float, x: FuzzyNumber) -> FuzzyNumber:
    """Scale by a real; a negative factor swaps the endpoint roles."""
    if not math.isfinite(lam):
        raise NonFinite(f"scalar factor must be finite, got {lam!r}")
    if lam >= 0.0:
        return FuzzyNumber(x.grid, lam * x.lower, lam * x.upper)
    return FuzzyNumber(x.grid, lam * x.upper, lam * x.lower)


def leq(x: FuzzyNumber, y: FuzzyNumber, tol: float = 0.0) -> OrderVerdict:
    """Levelwise endpoint order: x <= y iff both endpoints are below at every level."""
    _same_grid(x, y)
    if tol < 0.0:
        raise DomainError(f"tolerance must be nonnegative, got {tol!r}")
    lower_bad = x.lower > y.lower + tol
    upper_bad = x.upper > y.upper + tol
    bad = lower_bad | upper_bad
    if not bad.any():
        return OrderVerdict(holds=True)
    j = int(np.argmax(bad))
    if lower_bad[j]:
        side, gap = SIDE_LOWER, float(x.lower[j] - y.lower[j])
    else:
        side, gap = SIDE_UPPER, float(x.upper[j] - y.upper[j])
    return OrderVerdict(
        holds=False,
        first_violation=OrderViolation(
            index=j, alpha=float(x.grid.levels[j]), side=side, gap=gap
        ),
    )


def distance_sup(x: FuzzyNumber, y: FuzzyNumber) -> float:
    """Supremum over alpha of the larger endpoint gap."""
    _same_grid(x, y)
    gaps = np.maximum(np.abs(x.lower - y.lower), np.abs(x.upper - y.upper))
    return float(np.max(gaps))


def width(x: FuzzyNumber, alpha: float = 0.0) -> float:
    """Length of the alpha-level interval."""
    lo, hi = x.level(alpha)
    return hi - lo


def is_crisp(x: FuzzyNumber) -> bool:
    """True when the support collapses to a point (within tolerance)."""
    return width(x, 0.0) <= COMPARISON_TOL


def repair(grid: AlphaGrid, lower, upper) -> RepairResult:
    """Project noisy endpoint data onto the nearest monotone envelope.

    The lower endpoint becomes its running maximum, the upper endpoint its
    running minimum, and a crossing at alpha = 1 is resolved at the midpoint
    of the two core values. Non-finite input is still rejected.
    """
    raw_lower = np.asarray(lower, dtype=float)
    raw_upper = np.asarray(upper, dtype=float)
    if not (np.all(np.isfinite(raw_lower)) and np.all(np.isfinite(raw_upper))):
        raise NonFinite("endpoint arrays must be finite")

    fixed_lower = np.maximum.accumulate(raw_lower)
    fixed_upper = np.minimum.accumulate(raw_upper)
    if fixed_lower[-1] > fixed_upper[-1]:
        middle = 0.5 * (fixed_lower[-1] + fixed_upper[-1])
        fixed_lower = np.minimum(fixed_lower, middle)
        fixed_upper = np.maximum(fixed_upper, middle)

    changed = not (
        np.array_equal(fixed_lower, raw_lower) and np.array_equal(fixed_upper, raw_upper)
    )
    if changed:
        _LOGGER.warning(
            "Repaired fuzzy endpoint data (max adjustment %.3e)",
            float(
                max(
                    np.max(np.abs(fixed_lower - raw_lower)),
                    np.max(np.abs(fixed_upper - raw_upper)),
                )
            ),
        )
    return RepairResult(number=FuzzyNumber(grid, fixed_lower, fixed_upper), changed=changed)
