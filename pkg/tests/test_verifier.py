"""Tests for residuals, initial conditions, signs and ordering."""
from __future__ import annotations

import json
import math

import numpy as np
import pytest
import voluptuous as vol

from fuzzfrac.analysis.fracalc import (
    CoefToken,
    CrispCoefFn,
    FuzzyPowerFunc,
    Kernel,
    KernelToken,
    PowerTerm,
    constant,
    evaluate,
    gamma,
    power,
    rl_deriv_power,
    zero_function,
)
from fuzzfrac.analysis.fuzzy import crisp, distance_sup, scalar_mul, triangular, width, zero_hat
from fuzzfrac.analysis.presets import (
    example1_bounds,
    example1_coefficient,
    example1_problem,
    example2_problem,
    example2_sign_function,
    example2_solution,
)
from fuzzfrac.analysis.utils import DATA_DIR, log_time_grid
from fuzzfrac.analysis.verifier import (
    TU,
    U,
    ConstFn,
    IVPProblem,
    Scale,
    Sum,
    VerificationConfig,
    check_c1mq_membership,
    default_ic_times,
    eval_rhs,
    initial_limit,
    residual,
    sign_report,
    verify_initial,
    verify_ordering,
    verify_solution,
)
from fuzzfrac.const import CSV_COLUMNS, DEFAULT_IC_TIMES, SIGN_NEGATIVE, SIGN_POSITIVE, SIGN_ZERO
from fuzzfrac.exceptions import DomainError, UnsupportedExponent


def test_problem_validation(c123):
    with pytest.raises(DomainError):
        IVPProblem(q=1.0, b=1.0, u0=c123, rhs=U())
    with pytest.raises(DomainError):
        IVPProblem(q=0.5, b=0.0, u0=c123, rhs=U())


def test_example1_rhs_collapses_levelwise(c123):
    q, t = 0.5, 0.25
    problem = example1_problem(q, c123.grid)
    rhs = eval_rhs(problem, constant(c123), t)
    expected = scalar_mul(t ** -q / gamma(1.0 - q), c123)
    assert distance_sup(rhs, expected) <= 1e-12


def test_zero_function_rhs(c123):
    problem = IVPProblem(q=0.5, b=1.0, u0=zero_hat(c123.grid), rhs=ConstFn(zero_function(c123.grid)))
    for t in (0.01, 0.5, 1.0):
        assert eval_rhs(problem, constant(c123), t) == zero_hat(c123.grid)


def test_no_cancellation_in_rhs(c123):
    rhs = Sum(U(), Scale(CrispCoefFn((CoefToken(-1.0, 0.0),)), U()))
    problem = IVPProblem(q=0.5, b=1.0, u0=zero_hat(c123.grid), rhs=rhs)
    value = eval_rhs(problem, constant(c123), 0.3)
    assert value != zero_hat(c123.grid)
    assert distance_sup(value, zero_hat(c123.grid)) == width(c123, 0.0)


def test_rhs_outside_domain(c123):
    problem = example1_problem(0.5, c123.grid)
    with pytest.raises(DomainError):
        eval_rhs(problem, constant(c123), problem.b * 1.5)
    with pytest.raises(DomainError):
        eval_rhs(problem, constant(c123), 0.0)


@pytest.mark.parametrize("t", [1e-4, 0.01, 0.25, 0.6])
def test_example1_residual_is_rounding_only(c123, t):
    problem = example1_problem(0.5, c123.grid)
    assert residual(problem, constant(c123), t) <= 1e-10


def test_example2_residual_is_rounding_only(c012):
    q = 0.88
    problem = example2_problem(q, c012)
    assert residual(problem, example2_solution(c012, q), 0.2) <= 1e-10


def test_upper_solution_is_not_exact(grid):
    q = 0.5
    problem = example1_problem(q, grid)
    candidate = power(crisp(1.0, grid), q)
    values = [residual(problem, candidate, float(t)) for t in log_time_grid(problem.b, 50)]
    assert max(values) > 0.01


def test_residual_rejects_low_exponent(c123):
    problem = example1_problem(0.5, c123.grid)
    with pytest.raises(UnsupportedExponent):
        residual(problem, power(c123, -0.9), 0.1)


def test_residual_distance_is_symmetric(c123):
    problem = example1_problem(0.5, c123.grid)
    u = power(c123, 0.5)
    lhs = evaluate(rl_deriv_power(u, 0.5), 0.3)
    rhs = eval_rhs(problem, u, 0.3)
    assert distance_sup(lhs, rhs) == distance_sup(rhs, lhs) == residual(problem, u, 0.3)


def test_volterra_methods_agree_in_rhs(c123):
    problem = example1_problem(0.5, c123.grid)
    u = FuzzyPowerFunc(c123.grid, (PowerTerm(c123, -0.5), PowerTerm(c123, 0.0)))
    exact = eval_rhs(problem, u, 0.4, method="exact")
    numeric = eval_rhs(problem, u, 0.4, nodes=4000, method="quadrature")
    assert distance_sup(exact, numeric) <= 1e-4


def test_initial_trace_example1(c123):
    q = 0.5
    problem = example1_problem(q, c123.grid)
    trace = verify_initial(problem, constant(c123))
    for t, distance in trace.points:
        assert distance == pytest.approx(3.0 * t ** (1.0 - q), rel=1e-12)
    assert trace.nonincreasing
    assert trace.converged
    assert trace.limit_gap == 0.0
    assert trace.slope == pytest.approx(1.0 - q, abs=0.02)


def test_initial_trace_example2_converges_through_limit(c012):
    q = 0.88
    problem = example2_problem(q, c012)
    trace = verify_initial(problem, example2_solution(c012, q))
    assert trace.final > trace.tol_ic
    assert trace.limit_gap == pytest.approx(0.0, abs=1e-15)
    assert trace.converged
    assert trace.slope == pytest.approx(1.0 - q, abs=0.02)


def test_initial_trace_not_converged(grid):
    problem = IVPProblem(q=0.5, b=1.0, u0=crisp(1.0, grid), rhs=U())
    trace = verify_initial(problem, zero_function(grid))
    assert [d for _, d in trace.points] == [1.0, 1.0, 1.0]
    assert trace.nonincreasing
    assert not trace.converged
    assert trace.slope == pytest.approx(0.0)


def test_initial_trace_time_validation(c123):
    problem = example1_problem(0.5, c123.grid)
    with pytest.raises(DomainError):
        verify_initial(problem, constant(c123), ts=(1e-5, 1e-3))
    with pytest.raises(DomainError):
        verify_initial(problem, constant(c123), ts=())


def test_initial_trace_default_times_fit_short_interval(c123):
    problem = IVPProblem(q=0.5, b=1e-4, u0=zero_hat(c123.grid), rhs=U())
    trace = verify_initial(problem, constant(c123))
    times = [t for t, _ in trace.points]
    assert times == pytest.approx([1e-4, 1e-5, 1e-6], rel=1e-12)
    assert all(0.0 < t <= problem.b for t in times)
    assert trace.nonincreasing
    assert default_ic_times(1.0) == DEFAULT_IC_TIMES


def test_short_interval_report_has_initial_trace(c123):
    problem = IVPProblem(q=0.5, b=1e-4, u0=zero_hat(c123.grid), rhs=U())
    report = verify_solution(problem, constant(c123), VerificationConfig(grid_points=20))
    assert report.ic_trace is not None
    assert not any("initial condition" in message for _, message in report.errors)


def test_initial_limit(c123, c012):
    q = 0.88
    assert initial_limit(example2_solution(c012, q), q) == c012
    assert initial_limit(constant(c123), q) == zero_hat(c123.grid)
    assert initial_limit(power(c123, -0.5), 0.7) is None


def test_sign_report_example1_endpoint():
    q = 0.5
    b = example1_problem(q).b
    assert b == pytest.approx((math.pi ** -0.5) ** (2.0 / 3.0), abs=1e-6)
    assert b == pytest.approx(0.682784, abs=1e-6)

    grid = np.linspace(0.002, 1.0, 500)
    points = sign_report(example1_coefficient(q), grid)
    nonnegative = [i for i, p in enumerate(points) if p.sign != SIGN_NEGATIVE]
    last = nonnegative[-1]
    assert nonnegative == list(range(last + 1))
    step = grid[1] - grid[0]
    assert grid[last] <= b + 1e-12
    assert b - grid[last] <= step


def test_sign_report_positive_before_b_and_zero_at_b():
    q = 0.5
    b = example1_problem(q).b
    points = sign_report(example1_coefficient(q), log_time_grid(b, 200))
    assert all(p.sign == SIGN_POSITIVE for p in points[:-1])
    assert points[-1].sign == SIGN_ZERO


def test_sign_report_example2_at_right_end():
    (point,) = sign_report(example2_sign_function(0.88), [0.32])
    assert point.value == pytest.approx(0.579, abs=1e-3)
    assert point.sign == SIGN_POSITIVE


def test_sign_report_zero_function():
    points = sign_report(CrispCoefFn.constant(0.0), [0.1, 0.2, 0.3])
    assert {p.sign for p in points} == {SIGN_ZERO}


def test_ordering_example1_zero(grid):
    q = 0.5
    bounds = example1_bounds(q, grid)
    t_grid = log_time_grid(example1_problem(q).b, 50)
    points = verify_ordering(bounds.lower, zero_function(grid), bounds.upper, t_grid)
    assert all(p.holds for p in points)


def test_ordering_example1_fails_for_large_c(c123):
    bounds = example1_bounds(0.5, c123.grid)
    (point,) = verify_ordering(bounds.lower, constant(c123), bounds.upper, [0.25])
    assert point.below.holds
    violation = point.above.first_violation
    assert violation.alpha == 0.0
    assert violation.side == "lower"
    assert violation.gap == pytest.approx(0.5)


@pytest.mark.parametrize("c, holds", [((1.0, 2.0, 3.0), True), ((-3.0, -2.0, -1.0), False)])
def test_ordering_example2(grid, c, holds):
    q = 0.88
    number = triangular(*c, grid)
    lower = power(number, q - 1.0)
    upper = power(scalar_mul(10.0, number), q - 1.0)
    points = verify_ordering(lower, example2_solution(number, q), upper, log_time_grid(0.32, 100))
    assert all(p.holds for p in points) is holds


def test_c1mq_membership(c123, c012):
    assert check_c1mq_membership(example2_solution(c012, 0.88), 0.88)
    assert not check_c1mq_membership(power(c123, -0.99), 0.5)
    assert check_c1mq_membership(zero_function(c123.grid), 0.5)


def test_verify_solution_example1_passes(c123):
    report = verify_solution(example1_problem(0.5, c123.grid), constant(c123))
    assert report.passed
    assert report.max_residual <= 1e-8
    assert report.max_residual == max(report.residuals)
    assert len(report.t_grid) == 200
    assert report.t_grid[-1] == report.b
    assert report.errors == ()


def test_verify_solution_example2_passes(c012):
    q = 0.88
    report = verify_solution(example2_problem(q, c012), example2_solution(c012, q))
    assert report.passed
    assert report.widths["u0"] == 2.0


@pytest.mark.parametrize("points", [200, 800])
def test_residual_stays_small_under_refinement(c012, points):
    q = 0.8
    config = VerificationConfig(grid_points=points)
    report = verify_solution(example2_problem(q, c012), example2_solution(c012, q), config)
    assert report.max_residual <= 1e-10


def test_verify_solution_rejects_upper_solution(grid):
    q = 0.5
    report = verify_solution(example1_problem(q, grid), power(crisp(1.0, grid), q))
    assert not report.passed
    assert report.verdict == "fail"
    assert report.max_residual > 0.01


def test_verify_solution_quadrature_method(c123):
    config = VerificationConfig(grid_points=20, method="quadrature", nodes=500)
    report = verify_solution(example1_problem(0.5, c123.grid), constant(c123), config)
    assert report.passed


def test_verify_solution_records_point_errors(c123):
    kernel = Kernel((KernelToken(1.0), KernelToken(-2.0, s_exp=1.0)))
    problem = IVPProblem(q=0.5, b=1.0, u0=zero_hat(c123.grid), rhs=TU(), kernel=kernel)
    report = verify_solution(problem, constant(c123), VerificationConfig(grid_points=20))
    assert report.errors
    assert all(t is not None and t > 0.5 for t, _ in report.errors)
    assert not report.passed
    payload = report.to_dict()
    assert None in payload["residuals"]
    json.loads(report.to_json())


def test_verify_solution_records_unsupported_exponent(c123):
    report = verify_solution(example1_problem(0.5, c123.grid), power(c123, -0.9))
    assert not report.c1mq_member
    assert not report.passed
    assert math.isinf(report.max_residual)


def test_required_ordering_fails_verdict(c123):
    problem = example1_problem(0.5, c123.grid)
    bounds = example1_bounds(0.5, c123.grid)
    informational = verify_solution(problem, constant(c123), bounds=bounds)
    required = verify_solution(problem, constant(c123), bounds=bounds, require_ordering=True)
    assert informational.passed
    assert informational.ordering_holds is False
    assert any("ordering" in note for note in informational.warnings)
    assert not required.passed


def test_report_is_deterministic(c123):
    problem = example1_problem(0.5, c123.grid)
    first = verify_solution(problem, constant(c123)).to_json()
    second = verify_solution(problem, constant(c123)).to_json()
    assert first == second


def test_report_follows_documented_schema(c123):
    schema = json.loads((DATA_DIR / "report_schema.json").read_text(encoding="utf-8"))
    payload = verify_solution(example1_problem(0.5, c123.grid), constant(c123)).to_dict()
    assert set(payload) == set(schema["required"])
    assert payload["schema"] == 1
    assert payload["verdict"] == "pass"


def test_report_frame(c123):
    problem = example1_problem(0.5, c123.grid)
    bounds = example1_bounds(0.5, c123.grid)
    report = verify_solution(
        problem,
        constant(c123),
        VerificationConfig(grid_points=25),
        sign_checks=(),
        bounds=bounds,
    )
    frame = report.to_frame()
    assert tuple(frame.columns) == CSV_COLUMNS
    assert len(frame) == 25
    assert report.to_csv().splitlines()[0] == ",".join(CSV_COLUMNS)


@pytest.mark.parametrize(
    "options",
    [
        {"grid_points": 5},
        {"nodes": 4},
        {"tol": -1.0},
        {"method": "simpson"},
        {"t_min_ratio": 1.0},
        {"ic_times": ()},
    ],
)
def test_verification_config_validation(options):
    with pytest.raises(vol.Invalid):
        VerificationConfig(**options)
