"""JSON and shorthand (de)serialization of problems, solutions and fuzzy numbers.

Documents are validated in two passes: a voluptuous schema checks the shape
of each node, then the domain constructors check the mathematics. Either
failure becomes a ProblemFormatError that names the offending key path.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import logging
from pathlib import Path
from typing import Any, Callable, Generic, TypeVar

import numpy as np
import voluptuous as vol

from .analysis.fracalc import (
    CoefToken,
    CrispCoefFn,
    FuzzyPowerFunc,
    Kernel,
    KernelToken,
    PowerTerm,
)
from .analysis.fuzzy import (
    AlphaGrid,
    FuzzyNumber,
    crisp,
    from_levels,
    repair,
    triangular,
)
from .analysis.utils import dumps_canonical, load_json_document, parse_json_text
from .analysis.verifier import TU, U, ConstFn, IVPProblem, RhsExpr, Scale, Sum
from .const import DEFAULT_ALPHA_LEVELS, REPORT_SCHEMA_VERSION
from .exceptions import FuzzFracError, InvalidFuzzyNumber, NonFinite, ProblemFormatError

_LOGGER = logging.getLogger(__name__)

T = TypeVar("T")

_NUMBER = vol.All(vol.Any(int, float), vol.Coerce(float))
_LEVELS = vol.All(int, vol.Range(min=2))

FUZZY_LEVELS_SCHEMA = vol.Schema(
    {
        vol.Optional("levels"): _LEVELS,
        vol.Required("lower"): [_NUMBER],
        vol.Required("upper"): [_NUMBER],
    }
)
COEF_FN_SCHEMA = vol.Schema(
    vol.All(
        [vol.Schema({vol.Required("a"): _NUMBER, vol.Optional("r", default=0.0): _NUMBER})],
        vol.Length(min=1),
    )
)
KERNEL_TOKENS_SCHEMA = vol.Schema(
    vol.All(
        [
            vol.Schema(
                {
                    vol.Required("a"): _NUMBER,
                    vol.Optional("t", default=0.0): _NUMBER,
                    vol.Optional("s", default=0.0): _NUMBER,
                    vol.Optional("ts", default=0.0): _NUMBER,
                }
            )
        ],
        vol.Length(min=1),
    )
)
TERM_SCHEMA = vol.Schema({vol.Required("coef"): object, vol.Required("exponent"): _NUMBER})
POWER_FUNC_SCHEMA = vol.Schema({vol.Required("terms"): [TERM_SCHEMA]})
SCALE_SCHEMA = vol.Schema({vol.Required("scale"): object, vol.Required("expr"): object})
SUM_SCHEMA = vol.Schema({vol.Required("sum"): vol.All(list, vol.Length(min=2, max=2))})
CONST_SCHEMA = vol.Schema({vol.Required("const"): object})
PROBLEM_SCHEMA = vol.Schema(
    {
        vol.Optional("schema", default=REPORT_SCHEMA_VERSION): vol.All(
            int, vol.In([REPORT_SCHEMA_VERSION])
        ),
        vol.Optional("levels"): _LEVELS,
        vol.Optional("name", default="custom"): str,
        vol.Required("q"): _NUMBER,
        vol.Required("b"): _NUMBER,
        vol.Required("u0"): object,
        vol.Required("rhs"): object,
        vol.Optional("kernel", default="one"): object,
    }
)
SOLUTION_SCHEMA = vol.Schema(
    {
        vol.Optional("schema", default=REPORT_SCHEMA_VERSION): vol.All(
            int, vol.In([REPORT_SCHEMA_VERSION])
        ),
        vol.Optional("levels"): _LEVELS,
        vol.Required("terms"): [TERM_SCHEMA],
    }
)


@dataclass(frozen=True)
class Decoded(Generic[T]):
    """A decoded document together with any repairs applied to it."""

    value: T
    source: str
    repairs: tuple[str, ...] = ()


@dataclass
class _Decoder:
    grid: AlphaGrid
    source: str
    allow_repair: bool = False
    repairs: list[str] = field(default_factory=list)

    def fail(self, message: str, path: str) -> ProblemFormatError:
        return ProblemFormatError(message, source=self.source, path=path or None)

    def validate(self, schema: vol.Schema, value: Any, path: str) -> Any:
        try:
            return schema(value)
        except vol.Invalid as err:
            inner = "/".join(str(key) for key in err.path)
            full = "/".join(part for part in (path, inner) if part)
            raise self.fail(err.msg, full) from err

    def build(self, factory: Callable[[], T], path: str) -> T:
        try:
            return factory()
        except FuzzFracError as err:
            raise self.fail(str(err), path) from err

    # -- leaves --

    def fuzzy(self, value: Any, path: str) -> FuzzyNumber:
        if isinstance(value, str):
            try:
                return parse_fuzzy_shorthand(value, self.grid)
            except FuzzFracError as err:
                raise self.fail(str(err), path) from err
        data = self.validate(FUZZY_LEVELS_SCHEMA, value, path)
        levels = data.get("levels", self.grid.level_count)
        if levels != self.grid.level_count:
            raise self.fail(
                f"fuzzy number has {levels} levels, document uses {self.grid.level_count}", path
            )
        try:
            return from_levels(self.grid, data["lower"], data["upper"])
        except NonFinite as err:
            raise self.fail(str(err), path) from err
        except InvalidFuzzyNumber as err:
            if not self.allow_repair:
                raise self.fail(str(err), path) from err
            if len(data["lower"]) != self.grid.level_count or len(data["upper"]) != self.grid.level_count:
                raise self.fail(str(err), path) from err
            result = repair(self.grid, data["lower"], data["upper"])
            self.repairs.append(f"repaired fuzzy number at {path or '<root>'}: {err}")
            return result.number

    def coef_fn(self, value: Any, path: str) -> CrispCoefFn:
        tokens = self.validate(COEF_FN_SCHEMA, value, path)
        return self.build(
            lambda: CrispCoefFn(tuple(CoefToken(tok["a"], tok["r"]) for tok in tokens)), path
        )

    def kernel(self, value: Any, path: str) -> Kernel:
        if value == "one":
            return Kernel.one()
        tokens = self.validate(KERNEL_TOKENS_SCHEMA, value, path)
        return self.build(
            lambda: Kernel(
                tuple(KernelToken(tok["a"], tok["t"], tok["s"], tok["ts"]) for tok in tokens)
            ),
            path,
        )

    def terms(self, raw_terms: list[dict[str, Any]], path: str) -> FuzzyPowerFunc:
        terms = []
        for i, term in enumerate(raw_terms):
            term_path = f"{path}/{i}" if path else str(i)
            coef = self.fuzzy(term["coef"], f"{term_path}/coef")
            terms.append(self.build(lambda: PowerTerm(coef, term["exponent"]), term_path))
        return self.build(lambda: FuzzyPowerFunc(self.grid, tuple(terms)), path)

    def power_func(self, value: Any, path: str) -> FuzzyPowerFunc:
        data = self.validate(POWER_FUNC_SCHEMA, value, path)
        return self.terms(data["terms"], f"{path}/terms")

    def rhs(self, value: Any, path: str) -> RhsExpr:
        if value == "u":
            return U()
        if value == "tu":
            return TU()
        if isinstance(value, dict) and "const" in value:
            data = self.validate(CONST_SCHEMA, value, path)
            return ConstFn(self.power_func(data["const"], f"{path}/const"))
        if isinstance(value, dict) and "scale" in value:
            data = self.validate(SCALE_SCHEMA, value, path)
            return Scale(
                self.coef_fn(data["scale"], f"{path}/scale"),
                self.rhs(data["expr"], f"{path}/expr"),
            )
        if isinstance(value, dict) and "sum" in value:
            data = self.validate(SUM_SCHEMA, value, path)
            left, right = data["sum"]
            return Sum(self.rhs(left, f"{path}/sum/0"), self.rhs(right, f"{path}/sum/1"))
        raise self.fail(
            'expected "u", "tu" or an object with one of "const", "scale", "sum"', path
        )


def parse_fuzzy_shorthand(text: str, grid: AlphaGrid | None = None) -> FuzzyNumber:
    """Parse "tri:a,b,c", "crisp:r" or "zero"."""
    text = text.strip()
    if text == "zero":
        return crisp(0.0, grid)
    kind, _, body = text.partition(":")
    try:
        values = [float(part) for part in body.split(",")] if body else []
    except ValueError as err:
        raise ProblemFormatError(f"cannot read numbers in {text!r}") from err
    if kind == "tri" and len(values) == 3:
        return triangular(*values, grid=grid)
    if kind == "crisp" and len(values) == 1:
        return crisp(values[0], grid)
    raise ProblemFormatError(f'expected "tri:a,b,c", "crisp:r" or "zero", got {text!r}')


# ---------------------------------------------------------------------------
# Decoding


def _explicit_levels(value: Any) -> int | None:
    """First "levels" carried by an endpoint-array fuzzy number inside value."""
    if isinstance(value, dict):
        levels = value.get("levels")
        if "lower" in value and "upper" in value and isinstance(levels, int):
            return levels
        children = list(value.values())
    elif isinstance(value, list):
        children = value
    else:
        return None
    for child in children:
        found = _explicit_levels(child)
        if found is not None:
            return found
    return None


def _document_levels(doc: dict[str, Any], *parts: Any) -> int:
    """Top-level "levels", else the first fuzzy number's own, else the default."""
    if "levels" in doc:
        return doc["levels"]
    for part in parts:
        found = _explicit_levels(part)
        if found is not None:
            return found
    return DEFAULT_ALPHA_LEVELS


def problem_from_dict(
    data: Any, source: str = "<input>", *, allow_repair: bool = False
) -> Decoded[IVPProblem]:
    if not isinstance(data, dict):
        raise ProblemFormatError("a problem document must be a JSON object", source=source)
    schema_pass = _Decoder(AlphaGrid(), source)
    doc = schema_pass.validate(PROBLEM_SCHEMA, data, "")
    levels = _document_levels(doc, doc["u0"], doc["rhs"])
    decoder = _Decoder(schema_pass.build(lambda: AlphaGrid(levels), "levels"), source, allow_repair)
    u0 = decoder.fuzzy(doc["u0"], "u0")
    rhs = decoder.rhs(doc["rhs"], "rhs")
    kernel = decoder.kernel(doc["kernel"], "kernel")
    problem = decoder.build(
        lambda: IVPProblem(q=doc["q"], b=doc["b"], u0=u0, rhs=rhs, kernel=kernel, name=doc["name"]),
        "",
    )
    return Decoded(problem, source, tuple(decoder.repairs))


def solution_from_dict(
    data: Any, source: str = "<input>", *, allow_repair: bool = False
) -> Decoded[FuzzyPowerFunc]:
    if not isinstance(data, dict):
        raise ProblemFormatError("a solution document must be a JSON object", source=source)
    schema_pass = _Decoder(AlphaGrid(), source)
    doc = schema_pass.validate(SOLUTION_SCHEMA, data, "")
    levels = _document_levels(doc, doc["terms"])
    decoder = _Decoder(schema_pass.build(lambda: AlphaGrid(levels), "levels"), source, allow_repair)
    solution = decoder.terms(doc["terms"], "terms")
    return Decoded(solution, source, tuple(decoder.repairs))


def load_problem(path: Path | str, *, allow_repair: bool = False) -> Decoded[IVPProblem]:
    """Read and validate a problem file."""
    result = load_json_document(path)
    decoded = problem_from_dict(result.data, result.source, allow_repair=allow_repair)
    _LOGGER.debug("Loaded problem %s from %s", decoded.value.name, result.source)
    return decoded


def load_solution(path: Path | str, *, allow_repair: bool = False) -> Decoded[FuzzyPowerFunc]:
    """Read and validate a solution file."""
    result = load_json_document(path)
    return solution_from_dict(result.data, result.source, allow_repair=allow_repair)


def loads_problem(raw: str, source: str = "<input>") -> IVPProblem:
    result = parse_json_text(raw, source)
    return problem_from_dict(result.data, result.source).value


# ---------------------------------------------------------------------------
# Encoding


def fuzzy_to_json(x: FuzzyNumber) -> Any:
    """Shorthand when it reproduces x exactly, otherwise the endpoint arrays."""
    a, b, c = float(x.lower[0]), float(x.lower[-1]), float(x.upper[0])
    if b == float(x.upper[-1]):
        if a == b == c and np.all(x.lower == a) and np.all(x.upper == a):
            return "zero" if a == 0.0 else f"crisp:{a!r}"
        if x == triangular(a, b, c, x.grid):
            return f"tri:{a!r},{b!r},{c!r}"
    return {
        "levels": x.grid.level_count,
        "lower": [float(v) for v in x.lower],
        "upper": [float(v) for v in x.upper],
    }


def coef_fn_to_json(fn: CrispCoefFn) -> list[dict[str, float]]:
    return [{"a": tok.a, "r": tok.r} for tok in fn.tokens]


def kernel_to_json(kernel: Kernel) -> Any:
    if kernel.is_one:
        return "one"
    return [{"a": tok.a, "t": tok.t_exp, "s": tok.s_exp, "ts": tok.ts_exp} for tok in kernel.tokens]


def _terms_to_json(u: FuzzyPowerFunc) -> list[dict[str, Any]]:
    return [{"coef": fuzzy_to_json(term.coef), "exponent": term.exponent} for term in u.terms]


def power_func_to_json(u: FuzzyPowerFunc) -> dict[str, Any]:
    return {"terms": _terms_to_json(u)}


def rhs_to_json(expr: RhsExpr) -> Any:
    if isinstance(expr, U):
        return "u"
    if isinstance(expr, TU):
        return "tu"
    if isinstance(expr, ConstFn):
        return {"const": power_func_to_json(expr.fn)}
    if isinstance(expr, Scale):
        return {"scale": coef_fn_to_json(expr.coef), "expr": rhs_to_json(expr.expr)}
    if isinstance(expr, Sum):
        return {"sum": [rhs_to_json(expr.left), rhs_to_json(expr.right)]}
    raise TypeError(f"unknown right-hand side node {expr!r}")


def problem_to_dict(problem: IVPProblem) -> dict[str, Any]:
    return {
        "schema": REPORT_SCHEMA_VERSION,
        "levels": problem.grid.level_count,
        "name": problem.name,
        "q": problem.q,
        "b": problem.b,
        "u0": fuzzy_to_json(problem.u0),
        "rhs": rhs_to_json(problem.rhs),
        "kernel": kernel_to_json(problem.kernel),
    }


def solution_to_dict(u: FuzzyPowerFunc) -> dict[str, Any]:
    return {
        "schema": REPORT_SCHEMA_VERSION,
        "levels": u.grid.level_count,
        "terms": _terms_to_json(u),
    }


def dumps_problem(problem: IVPProblem) -> str:
    return dumps_canonical(problem_to_dict(problem))


def dumps_solution(u: FuzzyPowerFunc) -> str:
    return dumps_canonical(solution_to_dict(u))
