"""Riemann-Liouville calculus on fuzzy-coefficient power functions.

Two paths are provided for every operator:

* an exact path, applying the power rules
  ``I^q t^p = Gamma(p+1)/Gamma(p+1+q) t^(p+q)`` and
  ``D^q t^p = Gamma(p+1)/Gamma(p+1-q) t^(p-q)`` termwise, and
* a numeric path, product integration of the defining integrals, used to
  cross-check the closed forms.

All multipliers that reach a fuzzy coefficient are nonnegative, so scaling
never swaps endpoint roles and every result is again a valid fuzzy number.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import logging
import math
from typing import Iterable

import numpy as np

from ..const import COMPARISON_TOL, EXPONENT_TOL, MIN_NODES
from ..exceptions import DomainError, GridMismatch, KernelSignError, UnsupportedExponent
from .fuzzy import AlphaGrid, FuzzyNumber, add, scalar_mul, zero_hat

_LOGGER = logging.getLogger(__name__)

# Lanczos approximation, g = 7, nine coefficients.
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def gamma(x: float) -> float:
    """Gamma function for x > 0 (relative error well below 1e-12 on [0.01, 30])."""
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"gamma is only defined here for finite x > 0, got {x!r}")
    if x < 0.5:
        return gamma(x + 1.0) / x
    z = x - 1.0
    series = _LANCZOS_COEFFS[0]
    for i, coeff in enumerate(_LANCZOS_COEFFS[1:], start=1):
        series += coeff / (z + i)
    base = z + _LANCZOS_G + 0.5
    return _SQRT_2PI * base ** (z + 0.5) * math.exp(-base) * series


def beta(x: float, y: float) -> float:
    """Euler beta function B(x, y) = Gamma(x)Gamma(y)/Gamma(x+y)."""
    if y == 1.0:
        return 1.0 / x
    if x == 1.0:
        return 1.0 / y
    return gamma(x) * gamma(y) / gamma(x + y)


def _check_order(q: float) -> None:
    if not 0.0 < q < 1.0:
        raise DomainError(f"fractional order must lie in (0, 1), got {q!r}")


def _check_time(t: float) -> None:
    if not math.isfinite(t) or t <= 0.0:
        raise DomainError(f"t must be a finite positive time, got {t!r}")


def _check_nodes(nodes: int) -> None:
    if nodes < MIN_NODES:
        raise DomainError(f"quadrature needs at least {MIN_NODES} nodes, got {nodes!r}")


# ---------------------------------------------------------------------------
# Power functions


@dataclass(frozen=True)
class PowerTerm:
    """Single term coef * t**exponent."""

    coef: FuzzyNumber
    exponent: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.exponent) or self.exponent <= -1.0:
            raise DomainError(f"power exponents must be finite and > -1, got {self.exponent!r}")


@dataclass(frozen=True)
class FuzzyPowerFunc:
    """Finite sum of fuzzy-coefficient power terms with distinct exponents.

    Terms are kept sorted by exponent. An empty term list is the function
    that is identically zero-hat.
    """

    grid: AlphaGrid
    terms: tuple[PowerTerm, ...] = ()

    def __post_init__(self) -> None:
        terms = tuple(sorted(self.terms, key=lambda term: term.exponent))
        for term in terms:
            if term.coef.grid != self.grid:
                raise GridMismatch("power term coefficient lives on a different alpha grid")
        for left, right in zip(terms, terms[1:]):
            if right.exponent - left.exponent <= EXPONENT_TOL:
                raise DomainError(f"duplicate exponent {left.exponent!r} in power function")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_terms(cls, grid: AlphaGrid, terms: Iterable[PowerTerm]) -> "FuzzyPowerFunc":
        """Build a power function, merging terms whose exponents coincide."""
        merged: list[PowerTerm] = []
        for term in sorted(terms, key=lambda term: term.exponent):
            if merged and term.exponent - merged[-1].exponent <= EXPONENT_TOL:
                previous = merged.pop()
                term = PowerTerm(add(previous.coef, term.coef), previous.exponent)
            merged.append(term)
        return cls(grid, tuple(merged))

    @property
    def exponents(self) -> tuple[float, ...]:
        return tuple(term.exponent for term in self.terms)

    def __call__(self, t: float) -> FuzzyNumber:
        return evaluate(self, t)

    def __add__(self, other: "FuzzyPowerFunc") -> "FuzzyPowerFunc":
        if not isinstance(other, FuzzyPowerFunc):
            return NotImplemented
        if other.grid != self.grid:
            raise GridMismatch("power functions live on different alpha grids")
        return FuzzyPowerFunc.from_terms(self.grid, self.terms + other.terms)

    def __rmul__(self, factor: float) -> "FuzzyPowerFunc":
        return FuzzyPowerFunc(
            self.grid,
            tuple(PowerTerm(scalar_mul(float(factor), term.coef), term.exponent) for term in self.terms),
        )


def constant(c: FuzzyNumber) -> FuzzyPowerFunc:
    """The constant function t -> c."""
    return FuzzyPowerFunc(c.grid, (PowerTerm(c, 0.0),))


def power(c: FuzzyNumber, exponent: float) -> FuzzyPowerFunc:
    """The function t -> c * t**exponent."""
    return FuzzyPowerFunc(c.grid, (PowerTerm(c, exponent),))


def zero_function(grid: AlphaGrid) -> FuzzyPowerFunc:
    return FuzzyPowerFunc(grid, ())


def evaluate(u: FuzzyPowerFunc, t: float) -> FuzzyNumber:
    """Evaluate u(t) levelwise as a sum of positively scaled coefficients."""
    if not math.isfinite(t) or t < 0.0:
        raise DomainError(f"power functions are evaluated at t >= 0, got {t!r}")
    if t == 0.0 and any(p < 0.0 for p in u.exponents):
        raise DomainError("t = 0 is a singular point of a negative power")
    result = zero_hat(u.grid)
    for term in u.terms:
        result = add(result, scalar_mul(t ** term.exponent, term.coef))
    return result


# ---------------------------------------------------------------------------
# Crisp coefficient functions and kernels


@dataclass(frozen=True)
class CoefToken:
    a: float
    r: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and math.isfinite(self.r)):
            raise DomainError(f"coefficient tokens must be finite, got {(self.a, self.r)!r}")


@dataclass(frozen=True)
class CrispCoefFn:
    """Closed-form real coefficient sum(a_i * t**r_i)."""

    tokens: tuple[CoefToken, ...]

    @classmethod
    def constant(cls, a: float) -> "CrispCoefFn":
        return cls((CoefToken(a, 0.0),))

    def __call__(self, t: float) -> float:
        if not math.isfinite(t) or t < 0.0 or (t == 0.0 and any(tok.r < 0.0 for tok in self.tokens)):
            raise DomainError(f"coefficient function cannot be evaluated at t={t!r}")
        value = 0.0
        for token in self.tokens:
            value += token.a * math.pow(t, token.r)
        return value


@dataclass(frozen=True)
class KernelToken:
    """Kernel term a * t**t_exp * s**s_exp * (t - s)**ts_exp."""

    a: float
    t_exp: float = 0.0
    s_exp: float = 0.0
    ts_exp: float = 0.0

    def __post_init__(self) -> None:
        values = (self.a, self.t_exp, self.s_exp, self.ts_exp)
        if not all(math.isfinite(v) for v in values):
            raise DomainError(f"kernel tokens must be finite, got {values!r}")
        # Nonnegative exponents keep k continuous on {t >= s >= 0}.
        if min(self.t_exp, self.s_exp, self.ts_exp) < 0.0:
            raise DomainError(f"kernel exponents must be nonnegative, got {values[1:]!r}")


@dataclass(frozen=True)
class Kernel:
    """Volterra kernel k(t, s) as a sum of monomial tokens; default k = 1."""

    tokens: tuple[KernelToken, ...] = field(default_factory=lambda: (KernelToken(1.0),))

    @classmethod
    def one(cls) -> "Kernel":
        return cls()

    @property
    def is_one(self) -> bool:
        return self.tokens == (KernelToken(1.0),)

    def values(self, t: float, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        gap = np.maximum(t - s, 0.0)
        total = np.zeros_like(s)
        for token in self.tokens:
            total = total + token.a * t ** token.t_exp * s ** token.s_exp * gap ** token.ts_exp
        return total

    def __call__(self, t: float, s: float) -> float:
        return float(self.values(t, np.array([s]))[0])


def check_kernel_sign(kernel: Kernel, t: float, nodes: int) -> None:
    """Sample k(t, .) on [0, t] and raise if it dips below zero."""
    if all(token.a >= 0.0 for token in kernel.tokens):
        return
    samples = np.linspace(0.0, t, nodes + 1)
    values = kernel.values(t, samples)
    negative = np.flatnonzero(values < 0.0)
    if negative.size:
        j = int(negative[0])
        raise KernelSignError(t, float(samples[j]), float(values[j]))


# ---------------------------------------------------------------------------
# Exact operators


def rl_deriv_power(u: FuzzyPowerFunc, q: float) -> FuzzyPowerFunc:
    """Riemann-Liouville derivative of order q by the termwise power rule.

    A term with exponent q-1 is annihilated (its multiplier is 1/Gamma(0)).
    Exponents below q-1 are rejected: the multiplier changes sign across the
    poles of Gamma there.
    """
    _check_order(q)
    critical = q - 1.0
    terms = []
    for term in u.terms:
        p = term.exponent
        if abs(p - critical) <= EXPONENT_TOL:
            continue
        if p < critical:
            raise UnsupportedExponent(p, q)
        factor = gamma(p + 1.0) / gamma(p + 1.0 - q)
        terms.append(PowerTerm(scalar_mul(factor, term.coef), p - q))
    return FuzzyPowerFunc.from_terms(u.grid, terms)


def rl_integral_power(u: FuzzyPowerFunc, q: float) -> FuzzyPowerFunc:
    """Riemann-Liouville integral of order q by the termwise power rule."""
    _check_order(q)
    terms = []
    for term in u.terms:
        p = term.exponent
        factor = gamma(p + 1.0) / gamma(p + 1.0 + q)
        terms.append(PowerTerm(scalar_mul(factor, term.coef), p + q))
    return FuzzyPowerFunc.from_terms(u.grid, terms)


def volterra_exact(u: FuzzyPowerFunc, kernel: Kernel, t: float) -> FuzzyNumber:
    """Closed-form (Tu)(t) = int_0^t k(t,s) u(s) ds for token kernels.

    Each solution term gets one crisp multiplier summed over all kernel
    tokens. For a nonnegative kernel it is nonnegative and endpoint roles are
    preserved; a negative multiplier means the sampled sign check missed a
    negative stretch of the kernel and is raised, not clamped.
    """
    _check_time(t)
    check_kernel_sign(kernel, t, 4 * MIN_NODES)
    result = zero_hat(u.grid)
    for term in u.terms:
        p = term.exponent
        parts = []
        for token in kernel.tokens:
            power_s = token.s_exp + p
            parts.append(
                token.a
                * beta(power_s + 1.0, token.ts_exp + 1.0)
                * t ** (token.t_exp + power_s + token.ts_exp + 1.0)
            )
        multiplier = math.fsum(parts)
        if multiplier < 0.0:
            # cancelling tokens may leave a rounding-sized negative
            if -multiplier > COMPARISON_TOL * math.fsum(abs(part) for part in parts):
                raise KernelSignError(t, None, multiplier)
            _LOGGER.debug("Volterra multiplier %s at t=%s treated as zero", multiplier, t)
            multiplier = 0.0
        result = add(result, scalar_mul(multiplier, term.coef))
    return result


# ---------------------------------------------------------------------------
# Product integration


def _centroid_rule(length: float, exponent: float, panels: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for int_0^length x**exponent g(x) dx.

    The weight is integrated exactly on each panel and g is sampled at the
    weight's centroid there, which makes the rule exact for linear g and
    second order for smooth g even when exponent is in (-1, 0).
    """
    edges = np.linspace(0.0, length, panels + 1)
    mass = np.diff(edges ** (exponent + 1.0)) / (exponent + 1.0)
    moment = np.diff(edges ** (exponent + 2.0)) / (exponent + 2.0)
    nodes = np.clip(moment / mass, edges[:-1], edges[1:])
    return nodes, mass


def rl_integral_numeric(u: FuzzyPowerFunc, q: float, t: float, nodes: int) -> FuzzyNumber:
    """Quadrature of (1/Gamma(q)) int_0^t (t-s)^(q-1) u(s) ds.

    The interval is split at t/2: the s**p singularity is integrated exactly
    on the left half, the (t-s)**(q-1) singularity on the right half.
    """
    _check_order(q)
    _check_time(t)
    _check_nodes(nodes)
    half = 0.5 * t
    panels = max(nodes // 2, MIN_NODES // 2)
    right_tau, right_mass = _centroid_rule(half, q - 1.0, panels)
    right_s = t - right_tau
    scale = 1.0 / gamma(q)

    result = zero_hat(u.grid)
    for term in u.terms:
        p = term.exponent
        left_s, left_mass = _centroid_rule(half, p, panels)
        integral = math.fsum(left_mass * (t - left_s) ** (q - 1.0)) + math.fsum(
            right_mass * right_s ** p
        )
        result = add(result, scalar_mul(scale * integral, term.coef))
    _LOGGER.debug("I^%s u(%s) by quadrature with %d panels per half", q, t, panels)
    return result


def volterra(u: FuzzyPowerFunc, kernel: Kernel, t: float, nodes: int) -> FuzzyNumber:
    """Quadrature of (Tu)(t) = int_0^t k(t,s) u(s) ds.

    The endpoint singularity of s**p (p in (-1, 0)) is carried by the weight;
    the continuous kernel is the sampled factor. Lower endpoints integrate
    lower endpoints because every weight and kernel sample is nonnegative.
    """
    _check_time(t)
    _check_nodes(nodes)
    check_kernel_sign(kernel, t, nodes)
    result = zero_hat(u.grid)
    for term in u.terms:
        s, mass = _centroid_rule(t, term.exponent, nodes)
        k_values = kernel.values(t, s)
        if np.any(k_values < 0.0):
            j = int(np.argmax(k_values < 0.0))
            raise KernelSignError(t, float(s[j]), float(k_values[j]))
        result = add(result, scalar_mul(math.fsum(mass * k_values), term.coef))
    return result
