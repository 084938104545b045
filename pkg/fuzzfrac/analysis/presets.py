"""Worked example problems, algebra witnesses and the sign survey."""
from __future__ import annotations

from dataclasses import dataclass
import logging
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
import pandas as pd

from ..const import (
    COMPARISON_TOL,
    PRESET_EXAMPLE1,
    PRESET_EXAMPLE2,
    SIGN_NEGATIVE,
    SURVEY_POINTS,
    WITNESS_TRIANGLE,
)
from ..exceptions import DomainError
from .fracalc import (
    CoefToken,
    CrispCoefFn,
    FuzzyPowerFunc,
    Kernel,
    PowerTerm,
    constant,
    gamma,
    power,
    zero_function,
)
from .fuzzy import (
    AlphaGrid,
    FuzzyNumber,
    add,
    crisp,
    distance_sup,
    scalar_mul,
    triangular,
    width,
    zero_hat,
)
from .utils import DATA_DIR, finite_or_none, load_json_resource
from .verifier import (
    TU,
    U,
    ConstFn,
    IVPProblem,
    OrderingBounds,
    Scale,
    SignCheck,
    Sum,
    VerificationConfig,
    VerificationReport,
    eval_expr,
    sign_report,
    verify_solution,
)

_LOGGER = logging.getLogger(__name__)

PRESETS_PATH = DATA_DIR / "presets.json"


@dataclass(frozen=True)
class ParameterWindow:
    """Published range of the order q for a preset."""

    q_min: float
    q_max: float
    q_min_included: bool
    q_max_included: bool

    def contains(self, q: float) -> bool:
        above = q >= self.q_min if self.q_min_included else q > self.q_min
        below = q <= self.q_max if self.q_max_included else q < self.q_max
        return above and below

    def describe(self) -> str:
        left = "[" if self.q_min_included else "("
        right = "]" if self.q_max_included else ")"
        return f"{left}{self.q_min:g}, {self.q_max:g}{right}"


@dataclass(frozen=True)
class PresetInfo:
    key: str
    title: str
    equation: str
    window: ParameterWindow
    b: Optional[float]
    sign_check: str
    upper_factor: Optional[float]


@dataclass(frozen=True)
class PresetsData:
    """Parsed preset data."""

    raw: dict[str, Any]
    source: str

    def get(self, key: str) -> PresetInfo:
        entry = self.raw.get("presets", {}).get(key)
        if entry is None:
            raise KeyError(f"no preset named {key!r} in {self.source}")
        return PresetInfo(
            key=key,
            title=entry["title"],
            equation=entry["equation"],
            window=ParameterWindow(
                q_min=float(entry["q_min"]),
                q_max=float(entry["q_max"]),
                q_min_included=bool(entry["q_min_included"]),
                q_max_included=bool(entry["q_max_included"]),
            ),
            b=entry.get("b"),
            sign_check=entry["sign_check"],
            upper_factor=entry.get("upper_factor"),
        )


_cached: PresetsData | None = None


def load_presets(path: Path = PRESETS_PATH) -> PresetsData:
    """Load preset windows from packaged data."""
    global _cached
    if path != PRESETS_PATH:
        result = load_json_resource(path)
        return PresetsData(raw=result.data, source=result.source)
    if _cached is None:
        result = load_json_resource(path)
        _cached = PresetsData(raw=result.data, source=result.source)
    return _cached


def window_warning(key: str, q: float) -> Optional[str]:
    """Warning text when q lies outside the published window of a preset."""
    info = load_presets().get(key)
    if info.window.contains(q):
        return None
    message = (
        f"q={q:g} is outside the published range q in {info.window.describe()} "
        f"for {key}; results are exploratory"
    )
    _LOGGER.warning(message)
    return message


@dataclass(frozen=True)
class PresetRun:
    """A preset problem, the candidate solution checked, and its report."""

    problem: IVPProblem
    solution: FuzzyPowerFunc
    report: VerificationReport


def _reciprocal_gamma(q: float) -> float:
    if not 0.0 < q < 1.0:
        raise DomainError(f"q must lie in (0, 1), got {q!r}")
    return 1.0 / gamma(1.0 - q)


# ---------------------------------------------------------------------------
# Example 1: D^q u = (t^-q/Gamma(1-q) - t) u + int_0^t u(s) ds, t^(1-q) u -> 0


def example1_b(q: float) -> float:
    """Right endpoint where the coefficient t^-q/Gamma(1-q) - t reaches zero."""
    return _reciprocal_gamma(q) ** (1.0 / (1.0 + q))


def example1_coefficient(q: float) -> CrispCoefFn:
    return CrispCoefFn((CoefToken(_reciprocal_gamma(q), -q), CoefToken(-1.0, 1.0)))


def example1_problem(q: float, grid: AlphaGrid | None = None) -> IVPProblem:
    grid = grid or AlphaGrid()
    return IVPProblem(
        q=q,
        b=example1_b(q),
        u0=zero_hat(grid),
        rhs=Sum(Scale(example1_coefficient(q), U()), TU()),
        kernel=Kernel.one(),
        name=PRESET_EXAMPLE1,
    )


def example1_solution(c: FuzzyNumber) -> FuzzyPowerFunc:
    """u(t) = c for every fuzzy c."""
    return constant(c)


def example1_bounds(q: float, grid: AlphaGrid) -> OrderingBounds:
    """Lower solution 0 and upper solution t^q."""
    return OrderingBounds(lower=zero_function(grid), upper=power(crisp(1.0, grid), q))


def example1_sign_check(q: float) -> SignCheck:
    return SignCheck(load_presets().get(PRESET_EXAMPLE1).sign_check, example1_coefficient(q))


def run_example1(
    q: float,
    c: FuzzyNumber,
    config: VerificationConfig | None = None,
    *,
    require_ordering: bool = False,
    warnings: Sequence[str] = (),
) -> PresetRun:
    notes = list(warnings)
    override = window_warning(PRESET_EXAMPLE1, q)
    if override:
        notes.append(override)
    problem = example1_problem(q, c.grid)
    solution = example1_solution(c)
    _LOGGER.info("example1: q=%s, b=%.12g", q, problem.b)
    report = verify_solution(
        problem,
        solution,
        config,
        sign_checks=(example1_sign_check(q),),
        bounds=example1_bounds(q, c.grid),
        require_ordering=require_ordering,
        warnings=notes,
    )
    return PresetRun(problem=problem, solution=solution, report=report)


# ---------------------------------------------------------------------------
# Example 2: D^q u = c F(t)/Gamma(1-q) + u/Gamma(1-q), t^(1-q) u -> c,
# F(t) = t^-q - 1 - t^(q-1), on (0, 0.32]


def example2_b() -> float:
    return float(load_presets().get(PRESET_EXAMPLE2).b)


def example2_sign_function(q: float) -> CrispCoefFn:
    """F(t) = t^-q - 1 - t^(q-1)."""
    return CrispCoefFn((CoefToken(1.0, -q), CoefToken(-1.0, 0.0), CoefToken(-1.0, q - 1.0)))


def example2_problem(q: float, c: FuzzyNumber) -> IVPProblem:
    g = _reciprocal_gamma(q)
    forcing = CrispCoefFn(tuple(CoefToken(g * tok.a, tok.r) for tok in example2_sign_function(q).tokens))
    return IVPProblem(
        q=q,
        b=example2_b(),
        u0=c,
        rhs=Sum(Scale(forcing, ConstFn(constant(c))), Scale(CrispCoefFn.constant(g), U())),
        kernel=Kernel.one(),
        name=PRESET_EXAMPLE2,
    )


def example2_solution(c: FuzzyNumber, q: float) -> FuzzyPowerFunc:
    """u(t) = c + c t^(q-1)."""
    return FuzzyPowerFunc(c.grid, (PowerTerm(c, 0.0), PowerTerm(c, q - 1.0)))


def example2_bounds(c: FuzzyNumber, q: float) -> OrderingBounds:
    """Lower solution c t^(q-1) and upper solution 10 c t^(q-1)."""
    factor = load_presets().get(PRESET_EXAMPLE2).upper_factor or 10.0
    return OrderingBounds(lower=power(c, q - 1.0), upper=power(scalar_mul(factor, c), q - 1.0))


def example2_sign_check(q: float) -> SignCheck:
    return SignCheck(load_presets().get(PRESET_EXAMPLE2).sign_check, example2_sign_function(q))


def run_example2(
    q: float,
    c: FuzzyNumber,
    config: VerificationConfig | None = None,
    *,
    require_ordering: bool = False,
    warnings: Sequence[str] = (),
) -> PresetRun:
    notes = list(warnings)
    override = window_warning(PRESET_EXAMPLE2, q)
    if override:
        notes.append(override)
    problem = example2_problem(q, c)
    solution = example2_solution(c, q)
    report = verify_solution(
        problem,
        solution,
        config,
        sign_checks=(example2_sign_check(q),),
        bounds=example2_bounds(c, q),
        require_ordering=require_ordering,
        warnings=notes,
    )
    return PresetRun(problem=problem, solution=solution, report=report)


# ---------------------------------------------------------------------------
# Sign survey of F over (q, t)


@dataclass(frozen=True)
class SurveyRow:
    q: float
    values: tuple[float, ...]
    signs: tuple[str, ...]

    @property
    def negative_count(self) -> int:
        return sum(1 for sign in self.signs if sign == SIGN_NEGATIVE)


@dataclass(frozen=True)
class SignSurvey:
    """Sign of t^-q - 1 - t^(q-1) over a (q, t) grid."""

    t_values: tuple[float, ...]
    rows: tuple[SurveyRow, ...]

    @property
    def all_positive(self) -> bool:
        return all(row.negative_count == 0 for row in self.rows)

    def first_negative_t(self, row: SurveyRow) -> Optional[float]:
        for t, sign in zip(self.t_values, row.signs):
            if sign == SIGN_NEGATIVE:
                return t
        return None

    def to_dict(self) -> dict[str, Any]:
        negative_q = [row.q for row in self.rows if row.negative_count]
        return {
            "function": load_presets().get(PRESET_EXAMPLE2).sign_check,
            "t_values": list(self.t_values),
            "rows": [
                {
                    "q": row.q,
                    "negative_count": row.negative_count,
                    "first_negative_t": self.first_negative_t(row),
                    "min_value": finite_or_none(min(row.values)),
                }
                for row in self.rows
            ],
            "summary": {
                "points": len(self.rows) * len(self.t_values),
                "all_positive": self.all_positive,
                "negative_q_count": len(negative_q),
                "largest_negative_q": max(negative_q) if negative_q else None,
            },
        }

    def to_frame(self) -> pd.DataFrame:
        """Long table with one row per (q, t) point."""
        records = [
            {"q": row.q, "t": t, "value": value, "sign": sign}
            for row in self.rows
            for t, value, sign in zip(self.t_values, row.values, row.signs)
        ]
        return pd.DataFrame(records, columns=["q", "t", "value", "sign"])


def default_survey_grid(points: int = SURVEY_POINTS) -> tuple[np.ndarray, np.ndarray]:
    """Uniform grids over (0.58, 0.88] in q and (0, 0.32] in t, left ends excluded."""
    info = load_presets().get(PRESET_EXAMPLE2)
    q_values = np.linspace(info.window.q_min, info.window.q_max, points + 1)[1:]
    t_values = np.linspace(0.0, float(info.b), points + 1)[1:]
    return q_values, t_values


def sign_survey(q_values: Sequence[float], t_values: Sequence[float]) -> SignSurvey:
    """Classify F(t) = t^-q - 1 - t^(q-1) at every (q, t); measures, never asserts."""
    t_values = tuple(float(t) for t in t_values)
    if any(t <= 0.0 for t in t_values):
        raise DomainError("survey times must be positive")
    rows = []
    for q in q_values:
        points = sign_report(example2_sign_function(float(q)), t_values)
        rows.append(
            SurveyRow(
                q=float(q),
                values=tuple(p.value for p in points),
                signs=tuple(p.sign for p in points),
            )
        )
    survey = SignSurvey(t_values=t_values, rows=tuple(rows))
    negative = [row.q for row in survey.rows if row.negative_count]
    if negative:
        _LOGGER.warning(
            "Sign survey: t^-q - 1 - t^(q-1) is negative somewhere for %d of %d q values "
            "(q from %.4g to %.4g)",
            len(negative),
            len(survey.rows),
            min(negative),
            max(negative),
        )
    return survey


# ---------------------------------------------------------------------------
# Algebra witnesses


@dataclass(frozen=True)
class Witness:
    """Two sides of an identity and how far apart they are."""

    name: str
    left: FuzzyNumber
    right: FuzzyNumber
    distance: float
    width: float

    @property
    def equal(self) -> bool:
        return self.distance <= COMPARISON_TOL * max(1.0, self.width)

    def to_dict(self) -> dict[str, Any]:
        def support_and_core(x: FuzzyNumber) -> list[float]:
            return [float(x.lower[0]), float(x.lower[-1]), float(x.upper[0])]

        return {
            "name": self.name,
            "left": support_and_core(self.left),
            "right": support_and_core(self.right),
            "distance": self.distance,
            "width": self.width,
            "equal": self.equal,
        }


def _witness_number(x: FuzzyNumber | None) -> FuzzyNumber:
    return x if x is not None else triangular(*WITNESS_TRIANGLE)


def no_opposite_witness(x: FuzzyNumber | None = None) -> Witness:
    """x + (-1)x against zero: a non-crisp x leaves a gap equal to its support width."""
    x = _witness_number(x)
    left = add(x, scalar_mul(-1.0, x))
    return Witness(
        name="no-opposite",
        left=left,
        right=zero_hat(x.grid),
        distance=distance_sup(left, zero_hat(x.grid)),
        width=width(x, 0.0),
    )


def distributivity_witness(a: float, b: float, x: FuzzyNumber | None = None) -> Witness:
    """(a+b)x against ax + bx; equal when ab >= 0."""
    x = _witness_number(x)
    left = scalar_mul(a + b, x)
    right = add(scalar_mul(a, x), scalar_mul(b, x))
    return Witness(
        name="distributivity",
        left=left,
        right=right,
        distance=distance_sup(left, right),
        width=width(x, 0.0),
    )


def cancellation_gap(u: FuzzyPowerFunc, t: float) -> float:
    """Distance from (-t)u(t) + t u(t) to zero."""
    expr = Sum(
        Scale(CrispCoefFn((CoefToken(-1.0, 1.0),)), U()),
        Scale(CrispCoefFn((CoefToken(1.0, 1.0),)), U()),
    )
    return distance_sup(eval_expr(expr, u, t), zero_hat(u.grid))
