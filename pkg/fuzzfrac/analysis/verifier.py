"""Levelwise verification of candidate solutions of fuzzy fractional IVPs.

A problem is

    D^q u(t) = f(t, u(t), (Tu)(t)),  t in (0, b],
    lim_{t -> 0+} t^(1-q) u(t) = u0,

with (Tu)(t) = int_0^t k(t, s) u(s) ds and f given as a small expression tree.
A candidate u is checked by the sup-distance between both sides of the
equation on a time grid, by the weighted initial condition, and by
membership of the weighted solution space. Every fuzzy expression is
evaluated levelwise with sign-aware scaling; nothing relies on x - x = 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
import logging
import math
from typing import Any, Optional, Sequence, Union

import numpy as np
import pandas as pd
import voluptuous as vol

from ..const import (
    CSV_COLUMNS,
    DEFAULT_GRID_POINTS,
    DEFAULT_IC_TIMES,
    DEFAULT_NODES,
    DEFAULT_TOL,
    DEFAULT_TOL_IC,
    EXPONENT_TOL,
    METHOD_EXACT,
    METHOD_QUADRATURE,
    MIN_GRID_POINTS,
    MIN_NODES,
    REPORT_SCHEMA_VERSION,
    SIGN_NEGATIVE,
    T_GRID_MIN_RATIO,
    VERSION,
)
from ..exceptions import DomainError, FuzzFracError
from .fracalc import (
    CrispCoefFn,
    FuzzyPowerFunc,
    Kernel,
    evaluate,
    rl_deriv_power,
    volterra,
    volterra_exact,
)
from .fuzzy import (
    FuzzyNumber,
    OrderVerdict,
    add,
    distance_sup,
    leq,
    scalar_mul,
    width,
    zero_hat,
)
from .utils import classify_sign, dumps_canonical, finite_or_none, log_time_grid

_LOGGER = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Right-hand side expressions


@dataclass(frozen=True)
class ConstFn:
    """A known fuzzy function of t, independent of u."""

    fn: FuzzyPowerFunc


@dataclass(frozen=True)
class U:
    """The unknown u(t)."""


@dataclass(frozen=True)
class TU:
    """The Volterra term (Tu)(t)."""


@dataclass(frozen=True)
class Scale:
    """A crisp coefficient a(t) times a subexpression, scaled sign-aware per t."""

    coef: CrispCoefFn
    expr: "RhsExpr"


@dataclass(frozen=True)
class Sum:
    left: "RhsExpr"
    right: "RhsExpr"


RhsExpr = Union[ConstFn, U, TU, Scale, Sum]


@dataclass(frozen=True)
class IVPProblem:
    """Problem data: order q, domain (0, b], initial value, rhs and kernel."""

    q: float
    b: float
    u0: FuzzyNumber
    rhs: RhsExpr
    kernel: Kernel = field(default_factory=Kernel)
    name: str = "custom"

    def __post_init__(self) -> None:
        if not 0.0 < self.q < 1.0:
            raise DomainError(f"q must lie in (0, 1), got {self.q!r}")
        if not math.isfinite(self.b) or self.b <= 0.0:
            raise DomainError(f"b must be a finite positive number, got {self.b!r}")

    @property
    def grid(self):
        return self.u0.grid


class _PointContext:
    """Lazily evaluated u(t) and (Tu)(t) for a single time."""

    def __init__(
        self, kernel: Kernel, u: FuzzyPowerFunc, t: float, nodes: int, method: str
    ) -> None:
        self.kernel = kernel
        self.u = u
        self.t = t
        self.nodes = nodes
        self.method = method

    @cached_property
    def u_value(self) -> FuzzyNumber:
        return evaluate(self.u, self.t)

    @cached_property
    def tu_value(self) -> FuzzyNumber:
        if self.method == METHOD_QUADRATURE:
            return volterra(self.u, self.kernel, self.t, self.nodes)
        return volterra_exact(self.u, self.kernel, self.t)

    def evaluate(self, expr: RhsExpr) -> FuzzyNumber:
        if isinstance(expr, ConstFn):
            return evaluate(expr.fn, self.t)
        if isinstance(expr, U):
            return self.u_value
        if isinstance(expr, TU):
            return self.tu_value
        if isinstance(expr, Scale):
            return scalar_mul(expr.coef(self.t), self.evaluate(expr.expr))
        if isinstance(expr, Sum):
            return add(self.evaluate(expr.left), self.evaluate(expr.right))
        raise TypeError(f"unknown right-hand side node {expr!r}")


def eval_expr(
    expr: RhsExpr,
    u: FuzzyPowerFunc,
    t: float,
    kernel: Kernel | None = None,
    nodes: int = DEFAULT_NODES,
    method: str = METHOD_EXACT,
) -> FuzzyNumber:
    """Evaluate an expression tree at t for the given u, outside any problem."""
    if method not in (METHOD_EXACT, METHOD_QUADRATURE):
        raise DomainError(f"unknown Volterra method {method!r}")
    return _PointContext(kernel or Kernel(), u, t, nodes, method).evaluate(expr)


def _check_in_domain(problem: IVPProblem, t: float) -> None:
    if not 0.0 < t <= problem.b * (1.0 + 1e-12):
        raise DomainError(f"t={t!r} lies outside (0, {problem.b!r}]")


def eval_rhs(
    problem: IVPProblem,
    u: FuzzyPowerFunc,
    t: float,
    nodes: int = DEFAULT_NODES,
    method: str = METHOD_EXACT,
) -> FuzzyNumber:
    """Evaluate f(t, u(t), (Tu)(t)) levelwise."""
    _check_in_domain(problem, t)
    return eval_expr(problem.rhs, u, t, problem.kernel, nodes, method)


def residual(
    problem: IVPProblem,
    u: FuzzyPowerFunc,
    t: float,
    nodes: int = DEFAULT_NODES,
    method: str = METHOD_EXACT,
) -> float:
    """Sup-distance between D^q u(t) and the right-hand side at t."""
    derivative = rl_deriv_power(u, problem.q)
    return distance_sup(evaluate(derivative, t), eval_rhs(problem, u, t, nodes, method))


def check_c1mq_membership(u: FuzzyPowerFunc, q: float) -> bool:
    """True when t^(1-q) u(t) extends continuously to t = 0."""
    return all(p >= q - 1.0 - EXPONENT_TOL for p in u.exponents)


def initial_limit(u: FuzzyPowerFunc, q: float) -> Optional[FuzzyNumber]:
    """Exact limit of t^(1-q) u(t) as t -> 0+, or None if it diverges."""
    if not check_c1mq_membership(u, q):
        return None
    limit = zero_hat(u.grid)
    for term in u.terms:
        if abs(term.exponent - (q - 1.0)) <= EXPONENT_TOL:
            limit = add(limit, term.coef)
    return limit


# ---------------------------------------------------------------------------
# Initial condition, signs, ordering


@dataclass(frozen=True)
class InitialConditionTrace:
    """Distances d(t^(1-q) u(t), u0) along times decreasing towards 0."""

    points: tuple[tuple[float, float], ...]
    nonincreasing: bool
    limit_gap: Optional[float]
    slope: Optional[float]
    tol_ic: float

    @property
    def final(self) -> float:
        return self.points[-1][1]

    @property
    def converged(self) -> bool:
        if not self.nonincreasing:
            return False
        if self.final <= self.tol_ic:
            return True
        return self.limit_gap is not None and self.limit_gap <= self.tol_ic

    def to_dict(self) -> dict[str, Any]:
        return {
            "trace": [{"t": t, "distance": finite_or_none(d)} for t, d in self.points],
            "nonincreasing": self.nonincreasing,
            "limit_gap": finite_or_none(self.limit_gap),
            "fitted_slope": finite_or_none(self.slope),
            "tol_ic": self.tol_ic,
            "converged": self.converged,
        }


def _fitted_slope(points: Sequence[tuple[float, float]]) -> Optional[float]:
    usable = [(t, d) for t, d in points if d > 0.0 and math.isfinite(d)]
    if len(usable) < 2:
        return None
    log_t = np.log([t for t, _ in usable])
    log_d = np.log([d for _, d in usable])
    return float(np.polyfit(log_t, log_d, 1)[0])


def default_ic_times(b: float) -> tuple[float, ...]:
    """DEFAULT_IC_TIMES, rescaled so the largest time is b when b is smaller."""
    largest = DEFAULT_IC_TIMES[0]
    if b >= largest:
        return DEFAULT_IC_TIMES
    return tuple(b * (t / largest) for t in DEFAULT_IC_TIMES)


def verify_initial(
    problem: IVPProblem,
    u: FuzzyPowerFunc,
    ts: Sequence[float] | None = None,
    tol_ic: float = DEFAULT_TOL_IC,
) -> InitialConditionTrace:
    """Trace the weighted initial condition along ts (strictly decreasing).

    Without ts the default times are used, shrunk to fit short intervals.
    """
    ts = [float(t) for t in (default_ic_times(problem.b) if ts is None else ts)]
    if not ts:
        raise DomainError("the initial-condition trace needs at least one time")
    if any(later >= earlier for earlier, later in zip(ts, ts[1:])):
        raise DomainError("initial-condition times must be strictly decreasing")
    for t in ts:
        _check_in_domain(problem, t)

    weight = 1.0 - problem.q
    points = tuple(
        (t, distance_sup(scalar_mul(t ** weight, evaluate(u, t)), problem.u0)) for t in ts
    )
    nonincreasing = all(later <= earlier for (_, earlier), (_, later) in zip(points, points[1:]))
    limit = initial_limit(u, problem.q)
    limit_gap = distance_sup(limit, problem.u0) if limit is not None else None
    return InitialConditionTrace(
        points=points,
        nonincreasing=nonincreasing,
        limit_gap=limit_gap,
        slope=_fitted_slope(points),
        tol_ic=tol_ic,
    )


@dataclass(frozen=True)
class SignPoint:
    t: float
    value: float
    sign: str


@dataclass(frozen=True)
class SignCheck:
    """A named crisp coefficient whose sign the levelwise argument relies on."""

    name: str
    fn: CrispCoefFn


@dataclass(frozen=True)
class SignReport:
    name: str
    points: tuple[SignPoint, ...]

    @property
    def negative_points(self) -> tuple[SignPoint, ...]:
        return tuple(point for point in self.points if point.sign == SIGN_NEGATIVE)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "points": [
                {"t": p.t, "value": finite_or_none(p.value), "sign": p.sign} for p in self.points
            ],
            "negative_count": len(self.negative_points),
        }


def sign_report(fn: CrispCoefFn, t_grid: Sequence[float]) -> tuple[SignPoint, ...]:
    """Evaluate fn on the grid and classify each value; measures, never assumes."""
    points = []
    for t in t_grid:
        value = fn(float(t))
        points.append(SignPoint(t=float(t), value=value, sign=classify_sign(value)))
    return tuple(points)


@dataclass(frozen=True)
class OrderingPoint:
    """lower(t) <= mid(t) and mid(t) <= upper(t) at one time."""

    t: float
    below: OrderVerdict
    above: OrderVerdict

    @property
    def holds(self) -> bool:
        return self.below.holds and self.above.holds

    def to_dict(self) -> dict[str, Any]:
        payload: dict[str, Any] = {"t": self.t, "holds": self.holds}
        for key, verdict in (("lower_bound", self.below), ("upper_bound", self.above)):
            violation = verdict.first_violation
            payload[key] = None if violation is None else {
                "alpha": violation.alpha,
                "side": violation.side,
                "gap": violation.gap,
            }
        return payload


def verify_ordering(
    lower: FuzzyPowerFunc,
    mid: FuzzyPowerFunc,
    upper: FuzzyPowerFunc,
    t_grid: Sequence[float],
    tol: float = 0.0,
) -> tuple[OrderingPoint, ...]:
    """Check the bracket lower <= mid <= upper levelwise at every grid time."""
    points = []
    for t in t_grid:
        t = float(t)
        mid_value = evaluate(mid, t)
        points.append(
            OrderingPoint(
                t=t,
                below=leq(evaluate(lower, t), mid_value, tol),
                above=leq(mid_value, evaluate(upper, t), tol),
            )
        )
    return tuple(points)


# ---------------------------------------------------------------------------
# Full verification


VERIFICATION_CONFIG_SCHEMA = vol.Schema(
    {
        vol.Required("grid_points"): vol.All(int, vol.Range(min=MIN_GRID_POINTS)),
        vol.Required("nodes"): vol.All(int, vol.Range(min=MIN_NODES)),
        vol.Required("tol"): vol.All(vol.Coerce(float), vol.Range(min=0.0)),
        vol.Required("tol_ic"): vol.All(vol.Coerce(float), vol.Range(min=0.0)),
        vol.Required("ic_times"): vol.Any(
            None,
            vol.All(
                [vol.All(vol.Coerce(float), vol.Range(min=0.0, min_included=False))],
                vol.Length(min=1),
            ),
        ),
        vol.Required("t_min_ratio"): vol.All(
            vol.Coerce(float), vol.Range(min=0.0, max=1.0, min_included=False, max_included=False)
        ),
        vol.Required("method"): vol.In([METHOD_EXACT, METHOD_QUADRATURE]),
    }
)


@dataclass(frozen=True)
class VerificationConfig:
    """Knobs of :func:`verify_solution`."""

    grid_points: int = DEFAULT_GRID_POINTS
    nodes: int = DEFAULT_NODES
    tol: float = DEFAULT_TOL
    tol_ic: float = DEFAULT_TOL_IC
    ic_times: Optional[tuple[float, ...]] = None
    t_min_ratio: float = T_GRID_MIN_RATIO
    method: str = METHOD_EXACT

    def __post_init__(self) -> None:
        VERIFICATION_CONFIG_SCHEMA(self.to_dict())

    def to_dict(self) -> dict[str, Any]:
        return {
            "grid_points": self.grid_points,
            "nodes": self.nodes,
            "tol": self.tol,
            "tol_ic": self.tol_ic,
            "ic_times": None if self.ic_times is None else list(self.ic_times),
            "t_min_ratio": self.t_min_ratio,
            "method": self.method,
        }


@dataclass(frozen=True)
class OrderingBounds:
    """Lower and upper functions a solution is expected to lie between."""

    lower: FuzzyPowerFunc
    upper: FuzzyPowerFunc


@dataclass(frozen=True)
class VerificationReport:
    """Everything measured while checking one candidate solution."""

    problem_name: str
    q: float
    b: float
    config: VerificationConfig
    t_grid: tuple[float, ...]
    residuals: tuple[float, ...]
    max_residual: float
    ic_trace: Optional[InitialConditionTrace]
    c1mq_member: bool
    sign_reports: tuple[SignReport, ...]
    ordering: tuple[OrderingPoint, ...]
    ordering_required: bool
    widths: dict[str, Any]
    errors: tuple[tuple[Optional[float], str], ...]
    warnings: tuple[str, ...]

    @property
    def ordering_holds(self) -> Optional[bool]:
        if not self.ordering:
            return None
        return all(point.holds for point in self.ordering)

    @property
    def passed(self) -> bool:
        if self.errors or not self.c1mq_member:
            return False
        if not (self.max_residual <= self.config.tol):
            return False
        if self.ic_trace is None or not self.ic_trace.converged:
            return False
        if self.ordering_required and self.ordering_holds is False:
            return False
        return True

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": REPORT_SCHEMA_VERSION,
            "version": VERSION,
            "problem": {"name": self.problem_name, "q": self.q, "b": self.b},
            "config": self.config.to_dict(),
            "t_grid": list(self.t_grid),
            "residuals": [finite_or_none(r) for r in self.residuals],
            "max_residual": finite_or_none(self.max_residual),
            "tolerance": self.config.tol,
            "initial_condition": None if self.ic_trace is None else self.ic_trace.to_dict(),
            "c1mq_member": self.c1mq_member,
            "sign_reports": [report.to_dict() for report in self.sign_reports],
            "ordering": {
                "required": self.ordering_required,
                "holds": self.ordering_holds,
                "points": [point.to_dict() for point in self.ordering],
            },
            "widths": self.widths,
            "errors": [{"t": t, "message": message} for t, message in self.errors],
            "warnings": list(self.warnings),
            "verdict": self.verdict,
        }

    def to_json(self) -> str:
        return dumps_canonical(self.to_dict())

    def to_frame(self) -> pd.DataFrame:
        """Residual table with one row per grid time."""
        first_signs = self.sign_reports[0].points if self.sign_reports else ()
        ordering = {point.t: point.holds for point in self.ordering}
        rows = []
        for i, (t, value) in enumerate(zip(self.t_grid, self.residuals)):
            rows.append(
                {
                    "t": t,
                    "residual": value,
                    "coef1_sign": first_signs[i].sign if i < len(first_signs) else "",
                    "ordering_ok": ordering.get(t),
                }
            )
        return pd.DataFrame(rows, columns=list(CSV_COLUMNS))

    def to_csv(self) -> str:
        return self.to_frame().to_csv(index=False, float_format="%.17g")


def verify_solution(
    problem: IVPProblem,
    u: FuzzyPowerFunc,
    config: VerificationConfig | None = None,
    *,
    sign_checks: Sequence[SignCheck] = (),
    bounds: OrderingBounds | None = None,
    require_ordering: bool = False,
    warnings: Sequence[str] = (),
) -> VerificationReport:
    """Check u against the problem on a log-spaced grid and collect a report.

    Per-point failures are recorded in the report instead of aborting; any
    recorded error fails the verdict.
    """
    config = config or VerificationConfig()
    notes = list(warnings)
    errors: list[tuple[Optional[float], str]] = []
    t_grid = log_time_grid(problem.b, config.grid_points, config.t_min_ratio)

    member = check_c1mq_membership(u, problem.q)
    if not member:
        errors.append((None, f"solution exponents {u.exponents!r} fall below q-1"))

    derivative: FuzzyPowerFunc | None
    try:
        derivative = rl_deriv_power(u, problem.q)
    except FuzzFracError as err:
        errors.append((None, str(err)))
        derivative = None

    residuals = []
    for t in t_grid:
        t = float(t)
        if derivative is None:
            residuals.append(math.nan)
            continue
        try:
            lhs = evaluate(derivative, t)
            rhs = eval_rhs(problem, u, t, config.nodes, config.method)
            residuals.append(distance_sup(lhs, rhs))
        except FuzzFracError as err:
            _LOGGER.debug("Residual failed at t=%s: %s", t, err)
            errors.append((t, str(err)))
            residuals.append(math.nan)
    finite = [r for r in residuals if math.isfinite(r)]
    max_residual = max(finite) if finite else math.inf

    ic_trace = None
    try:
        ic_trace = verify_initial(problem, u, config.ic_times, config.tol_ic)
    except FuzzFracError as err:
        errors.append((None, f"initial condition: {err}"))

    reports = []
    for check in sign_checks:
        report = SignReport(check.name, sign_report(check.fn, t_grid))
        negative = report.negative_points
        if negative:
            notes.append(
                f"sign condition '{check.name}' is negative at {len(negative)} of "
                f"{len(report.points)} grid points (first at t={negative[0].t:.6g})"
            )
        reports.append(report)

    ordering: tuple[OrderingPoint, ...] = ()
    if bounds is not None:
        ordering = verify_ordering(bounds.lower, u, bounds.upper, t_grid)
        failing = [point for point in ordering if not point.holds]
        if failing:
            notes.append(
                f"ordering lower <= u <= upper fails at {len(failing)} of "
                f"{len(ordering)} grid points (first at t={failing[0].t:.6g})"
            )

    widths = {
        "u0": width(problem.u0, 0.0),
        "solution_coefficients": [width(term.coef, 0.0) for term in u.terms],
    }

    report = VerificationReport(
        problem_name=problem.name,
        q=problem.q,
        b=problem.b,
        config=config,
        t_grid=tuple(float(t) for t in t_grid),
        residuals=tuple(residuals),
        max_residual=max_residual,
        ic_trace=ic_trace,
        c1mq_member=member,
        sign_reports=tuple(reports),
        ordering=ordering,
        ordering_required=bool(bounds is not None and require_ordering),
        widths=widths,
        errors=tuple(errors),
        warnings=tuple(notes),
    )
    for note in notes:
        _LOGGER.warning("%s: %s", problem.name, note)
    _LOGGER.info(
        "%s: max residual %.3e over %d points, verdict %s",
        problem.name,
        max_residual,
        len(t_grid),
        report.verdict,
    )
    return report
