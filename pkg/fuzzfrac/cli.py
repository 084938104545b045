"""Command line front end for fuzzfrac."""
from __future__ import annotations

import argparse
from dataclasses import dataclass
import logging
import os
from pathlib import Path
import sys
from typing import Optional, Sequence

import voluptuous as vol

from .analysis.fracalc import FuzzyPowerFunc, check_kernel_sign
from .analysis.fuzzy import AlphaGrid, FuzzyNumber
from .analysis.presets import (
    default_survey_grid,
    distributivity_witness,
    no_opposite_witness,
    run_example1,
    run_example2,
    sign_survey,
)
from .analysis.utils import dumps_canonical
from .analysis.verifier import (
    IVPProblem,
    VerificationConfig,
    VerificationReport,
    check_c1mq_membership,
    verify_solution,
)
from .codec import (
    dumps_problem,
    dumps_solution,
    load_problem,
    load_solution,
    parse_fuzzy_shorthand,
)
from .const import (
    DEFAULT_ALPHA_LEVELS,
    DEFAULT_GRID_POINTS,
    DEFAULT_LOG_LEVEL,
    DEFAULT_NODES,
    DEFAULT_TOL,
    ENV_LOG_LEVEL,
    EXIT_INPUT_ERROR,
    EXIT_OK,
    EXIT_VERIFICATION_FAILED,
    FORMAT_CSV,
    FORMAT_JSON,
    METHOD_EXACT,
    METHOD_QUADRATURE,
    MIN_GRID_POINTS,
    MIN_NODES,
    SURVEY_POINTS,
    VERSION,
)
from .exceptions import FuzzFracError, GridMismatch, UnsupportedExponent

_LOGGER = logging.getLogger(__name__)

COMMANDS = ("example1", "example2", "demo", "verify", "survey")
DEMOS = ("no-opposite", "distributivity")

PRESET_DEFAULTS = {
    "example1": {"q": 0.5, "c": "tri:1,2,3"},
    "example2": {"q": 0.88, "c": "tri:0,1,2"},
}

_OPEN_UNIT = vol.All(
    vol.Coerce(float), vol.Range(min=0.0, max=1.0, min_included=False, max_included=False)
)

CLI_CONFIG_SCHEMA = vol.Schema(
    {
        vol.Required("command"): vol.In(COMMANDS),
        vol.Required("q"): vol.Any(None, _OPEN_UNIT),
        vol.Required("c"): vol.Any(None, str),
        vol.Required("grid_points"): vol.All(int, vol.Range(min=MIN_GRID_POINTS)),
        vol.Required("alpha_levels"): vol.All(int, vol.Range(min=2)),
        vol.Required("nodes"): vol.All(int, vol.Range(min=MIN_NODES)),
        vol.Required("tol"): vol.All(vol.Coerce(float), vol.Range(min=0.0)),
        vol.Required("out_path"): vol.Any(None, str),
        vol.Required("fmt"): vol.In([FORMAT_JSON, FORMAT_CSV]),
        vol.Required("method"): vol.In([METHOD_EXACT, METHOD_QUADRATURE]),
        vol.Required("repair"): bool,
        vol.Required("require_ordering"): bool,
    }
)


class CliUsageError(FuzzFracError):
    """Bad command line arguments."""


class _ArgumentParser(argparse.ArgumentParser):
    # Usage errors exit with the input-error code, not argparse's 2.
    def error(self, message: str) -> None:  # type: ignore[override]
        raise CliUsageError(f"{self.prog}: {message}")


@dataclass(frozen=True)
class CliConfig:
    """Validated options shared by all subcommands."""

    command: str
    q: Optional[float]
    c: Optional[str]
    grid_points: int = DEFAULT_GRID_POINTS
    alpha_levels: int = DEFAULT_ALPHA_LEVELS
    nodes: int = DEFAULT_NODES
    tol: float = DEFAULT_TOL
    out_path: Optional[str] = None
    fmt: str = FORMAT_JSON
    method: str = METHOD_EXACT
    repair: bool = False
    require_ordering: bool = False

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "CliConfig":
        defaults = PRESET_DEFAULTS.get(args.command, {})
        q = getattr(args, "q", None)
        c = getattr(args, "c", None)
        data = CLI_CONFIG_SCHEMA(
            {
                "command": args.command,
                "q": defaults.get("q") if q is None else q,
                "c": defaults.get("c") if c is None else c,
                "grid_points": args.grid,
                "alpha_levels": args.alpha_levels,
                "nodes": args.nodes,
                "tol": args.tol,
                "out_path": None if args.out is None else str(args.out),
                "fmt": args.format,
                "method": args.method,
                "repair": bool(getattr(args, "repair", False)),
                "require_ordering": bool(getattr(args, "require_ordering", False)),
            }
        )
        return cls(**data)

    @property
    def grid(self) -> AlphaGrid:
        return AlphaGrid(self.alpha_levels)

    def fuzzy_c(self) -> FuzzyNumber:
        if self.c is None:
            raise CliUsageError("--c is required")
        return parse_fuzzy_shorthand(self.c, self.grid)

    def verification(self) -> VerificationConfig:
        return VerificationConfig(
            grid_points=self.grid_points, nodes=self.nodes, tol=self.tol, method=self.method
        )


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grid", type=int, default=DEFAULT_GRID_POINTS, help="number of t points")
    parser.add_argument(
        "--alpha-levels", type=int, default=DEFAULT_ALPHA_LEVELS, help="alpha levels M+1"
    )
    parser.add_argument("--nodes", type=int, default=DEFAULT_NODES, help="quadrature nodes")
    parser.add_argument("--tol", type=float, default=DEFAULT_TOL, help="residual tolerance")
    parser.add_argument("--out", type=Path, default=None, help="write output here instead of stdout")
    parser.add_argument("--format", choices=(FORMAT_JSON, FORMAT_CSV), default=FORMAT_JSON)
    parser.add_argument(
        "--method",
        choices=(METHOD_EXACT, METHOD_QUADRATURE),
        default=METHOD_EXACT,
        help="how the Volterra term is evaluated",
    )


def _add_preset(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--q", type=float, default=None, help="fractional order in (0, 1)")
    parser.add_argument("--c", type=str, default=None, help='fuzzy c: "tri:a,b,c", "crisp:r" or "zero"')
    parser.add_argument(
        "--require-ordering",
        action="store_true",
        help="fail the verdict when the lower/upper ordering fails",
    )
    parser.add_argument("--write-problem", type=Path, default=None, help="save the problem as JSON")
    parser.add_argument("--write-solution", type=Path, default=None, help="save the solution as JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="fuzzfrac", description="Verify fuzzy fractional IVP solutions")
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    example1 = sub.add_parser("example1", help="u = c for the problem with a Volterra term")
    _add_preset(example1)
    _add_common(example1)

    example2 = sub.add_parser("example2", help="u = c + c t^(q-1) on (0, 0.32]")
    _add_preset(example2)
    _add_common(example2)

    demo = sub.add_parser("demo", help="witnesses of fuzzy algebra failures")
    demo.add_argument("name", choices=DEMOS)
    demo.add_argument("--a", type=float, default=1.0)
    demo.add_argument("--b", type=float, default=-1.0)
    _add_common(demo)

    verify = sub.add_parser("verify", help="verify a solution file against a problem file")
    verify.add_argument("problem", type=Path)
    verify.add_argument("solution", type=Path)
    verify.add_argument("--repair", action="store_true", help="repair non-monotone fuzzy data")
    _add_common(verify)

    survey = sub.add_parser("survey", help="sign of t^-q - 1 - t^(q-1) over a (q, t) grid")
    survey.add_argument("--points", type=int, default=SURVEY_POINTS, help="grid points per axis")
    _add_common(survey)
    return parser


def configure_logging() -> None:
    """Send library logging to stderr at the level named by FUZZFRAC_LOG."""
    name = os.environ.get(ENV_LOG_LEVEL, DEFAULT_LOG_LEVEL).upper()
    level = logging.getLevelName(name)
    if not isinstance(level, int):
        level = logging.getLevelName(DEFAULT_LOG_LEVEL)
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    logging.getLogger("fuzzfrac").setLevel(level)


def _emit(text: str, out_path: Optional[str]) -> None:
    if out_path is None:
        sys.stdout.write(text)
        return
    Path(out_path).write_text(text, encoding="utf-8")
    _LOGGER.info("Wrote %s", out_path)


def _emit_report(report: VerificationReport, config: CliConfig) -> int:
    text = report.to_csv() if config.fmt == FORMAT_CSV else report.to_json()
    _emit(text, config.out_path)
    print(
        f"{report.problem_name}: q={report.q:g} b={report.b:.12g} "
        f"max_residual={report.max_residual:.3e} tol={config.tol:g} verdict={report.verdict}",
        file=sys.stderr,
    )
    for note in report.warnings:
        print(f"warning: {note}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_VERIFICATION_FAILED


def cmd_example1(config: CliConfig, args: argparse.Namespace) -> int:
    run = run_example1(
        config.q, config.fuzzy_c(), config.verification(), require_ordering=config.require_ordering
    )
    _write_preset_files(run.problem, run.solution, args)
    return _emit_report(run.report, config)


def cmd_example2(config: CliConfig, args: argparse.Namespace) -> int:
    run = run_example2(
        config.q, config.fuzzy_c(), config.verification(), require_ordering=config.require_ordering
    )
    _write_preset_files(run.problem, run.solution, args)
    return _emit_report(run.report, config)


def _write_preset_files(
    problem: IVPProblem, solution: FuzzyPowerFunc, args: argparse.Namespace
) -> None:
    if args.write_problem is not None:
        args.write_problem.write_text(dumps_problem(problem), encoding="utf-8")
    if args.write_solution is not None:
        args.write_solution.write_text(dumps_solution(solution), encoding="utf-8")


def cmd_demo(config: CliConfig, args: argparse.Namespace) -> int:
    if args.name == "no-opposite":
        witness = no_opposite_witness()
        print("x = (0,1,2); x + (-1)x =", _triple(witness.left), file=sys.stderr)
    else:
        witness = distributivity_witness(args.a, args.b)
        print(
            f"(a+b)x = {_triple(witness.left)}; ax + bx = {_triple(witness.right)}",
            file=sys.stderr,
        )
    print(f"distance = {witness.distance:g}", file=sys.stderr)
    _emit(dumps_canonical(witness.to_dict()), config.out_path)
    return EXIT_OK


def _triple(x: FuzzyNumber) -> str:
    return f"({x.lower[0]:g},{x.lower[-1]:g},{x.upper[0]:g})"


def cmd_verify(config: CliConfig, args: argparse.Namespace) -> int:
    problem_doc = load_problem(args.problem, allow_repair=config.repair)
    solution_doc = load_solution(args.solution, allow_repair=config.repair)
    problem, solution = problem_doc.value, solution_doc.value
    if problem.grid != solution.grid:
        raise GridMismatch(
            f"problem uses {problem.grid.level_count} alpha levels, "
            f"solution uses {solution.grid.level_count}"
        )
    if not check_c1mq_membership(solution, problem.q):
        raise UnsupportedExponent(min(solution.exponents), problem.q)
    check_kernel_sign(problem.kernel, problem.b, config.nodes)
    report = verify_solution(
        problem,
        solution,
        config.verification(),
        require_ordering=False,
        warnings=problem_doc.repairs + solution_doc.repairs,
    )
    return _emit_report(report, config)


def cmd_survey(config: CliConfig, args: argparse.Namespace) -> int:
    if args.points < 2:
        raise CliUsageError("--points must be at least 2")
    q_values, t_values = default_survey_grid(args.points)
    survey = sign_survey(q_values, t_values)
    if config.fmt == FORMAT_CSV:
        text = survey.to_frame().to_csv(index=False, float_format="%.17g")
    else:
        text = dumps_canonical(survey.to_dict())
    _emit(text, config.out_path)
    summary = survey.to_dict()["summary"]
    print(
        f"survey: {summary['points']} points, negative for {summary['negative_q_count']} "
        f"of {len(survey.rows)} q values",
        file=sys.stderr,
    )
    return EXIT_OK


HANDLERS = {
    "example1": cmd_example1,
    "example2": cmd_example2,
    "demo": cmd_demo,
    "verify": cmd_verify,
    "survey": cmd_survey,
}


def main(argv: Sequence[str] | None = None) -> int:
    configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = CliConfig.from_args(args)
        return HANDLERS[config.command](config, args)
    except vol.Invalid as err:
        path = "/".join(str(key) for key in err.path)
        message = f"invalid option {path}: {err.msg}" if path else err.msg
    except (FuzzFracError, OSError) as err:
        message = str(err)
    _LOGGER.debug("Command failed", exc_info=True)
    print(f"fuzzfrac: error: {message}", file=sys.stderr)
    return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
