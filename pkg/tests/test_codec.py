"""Tests for problem and solution documents."""
from __future__ import annotations

import json

import numpy as np
import pytest

from conftest import assert_matches_golden
from fuzzfrac.analysis.fracalc import Kernel, KernelToken, constant, power
from fuzzfrac.analysis.fuzzy import AlphaGrid, crisp, from_levels, triangular
from fuzzfrac.analysis.presets import (
    example1_problem,
    example1_solution,
    example2_problem,
    example2_solution,
)
from fuzzfrac.analysis.verifier import TU, IVPProblem, Scale, Sum, U
from fuzzfrac.codec import (
    dumps_problem,
    dumps_solution,
    fuzzy_to_json,
    load_problem,
    load_solution,
    loads_problem,
    parse_fuzzy_shorthand,
    problem_from_dict,
    problem_to_dict,
    solution_from_dict,
    solution_to_dict,
)
from fuzzfrac.exceptions import ProblemFormatError


def _minimal_problem(**overrides) -> dict:
    doc = {"schema": 1, "q": 0.5, "b": 1.0, "u0": "zero", "rhs": "u"}
    doc.update(overrides)
    return doc


def test_shorthands(grid):
    assert parse_fuzzy_shorthand("zero", grid) == crisp(0.0, grid)
    assert parse_fuzzy_shorthand("crisp:2.5", grid) == crisp(2.5, grid)
    assert parse_fuzzy_shorthand(" tri:1,2,3 ", grid) == triangular(1.0, 2.0, 3.0, grid)


@pytest.mark.parametrize("text", ["tri:1,2", "crisp:", "tri:a,b,c", "box:1,2", "crisp:1,2"])
def test_bad_shorthands(text, grid):
    with pytest.raises(ProblemFormatError):
        parse_fuzzy_shorthand(text, grid)


def test_shorthand_checks_ordering(grid):
    with pytest.raises(ProblemFormatError):
        problem_from_dict(_minimal_problem(u0="tri:3,2,1"))


def test_fuzzy_to_json_forms(grid, c123):
    assert fuzzy_to_json(crisp(0.0, grid)) == "zero"
    assert fuzzy_to_json(crisp(-1.5, grid)) == "crisp:-1.5"
    assert fuzzy_to_json(c123) == "tri:1.0,2.0,3.0"
    levels = fuzzy_to_json(power_shape(grid))
    assert set(levels) == {"levels", "lower", "upper"}
    assert levels["levels"] == 101
    assert len(levels["lower"]) == 101


def power_shape(grid):
    # sqrt-shaped endpoints are not triangular
    return from_levels(grid, np.sqrt(grid.levels), 2.0 - np.sqrt(grid.levels))


def test_problem_round_trip_is_stable(c123):
    problem = example2_problem(0.88, c123)
    text = dumps_problem(problem)
    again = loads_problem(text)
    assert dumps_problem(again) == text
    assert again.name == "example2"
    assert again.u0 == c123


def test_solution_round_trip_is_stable(c123):
    u = example2_solution(c123, 0.8)
    text = dumps_solution(u)
    decoded = solution_from_dict(json.loads(text)).value
    assert dumps_solution(decoded) == text
    assert decoded.exponents == u.exponents


def test_level_array_round_trip(grid):
    x = power_shape(grid)
    decoded = solution_from_dict(solution_to_dict(constant(x))).value
    assert decoded.terms[0].coef == x


@pytest.mark.parametrize(
    "name, build",
    [
        ("example1_q0.5.json", lambda c: (example1_problem(0.5, c.grid), example1_solution(c))),
        ("example2_q0.88.json", lambda c: (example2_problem(0.88, c), example2_solution(c, 0.88))),
    ],
)
def test_presets_match_golden(golden, name, build):
    expected = golden(name)
    c = parse_fuzzy_shorthand(expected["c"], AlphaGrid())
    problem, solution = build(c)
    assert_matches_golden(problem_to_dict(problem), expected["problem"])
    assert_matches_golden(solution_to_dict(solution), expected["solution"])


def test_golden_documents_decode(golden):
    expected = golden("example1_q0.5.json")
    problem = problem_from_dict(expected["problem"]).value
    assert isinstance(problem.rhs, Sum)
    assert isinstance(problem.rhs.left, Scale)
    assert isinstance(problem.rhs.left.expr, U)
    assert isinstance(problem.rhs.right, TU)
    assert problem.kernel.is_one


def test_defaults_fill_in():
    problem = problem_from_dict(_minimal_problem()).value
    assert isinstance(problem, IVPProblem)
    assert problem.name == "custom"
    assert problem.grid.level_count == 101
    assert problem.kernel == Kernel.one()


def test_missing_key_names_path():
    doc = _minimal_problem()
    del doc["q"]
    with pytest.raises(ProblemFormatError) as info:
        problem_from_dict(doc, "problem.json")
    assert info.value.path == "q"
    assert "problem.json" in str(info.value)


def test_bad_rhs_node_names_path():
    with pytest.raises(ProblemFormatError) as info:
        problem_from_dict(_minimal_problem(rhs="v"))
    assert info.value.path == "rhs"

    with pytest.raises(ProblemFormatError) as info:
        problem_from_dict(_minimal_problem(rhs={"sum": ["u", {"scale": [{"a": 1.0}]}]}))
    assert info.value.path.startswith("rhs/sum/1")


def test_order_out_of_range():
    with pytest.raises(ProblemFormatError):
        problem_from_dict(_minimal_problem(q=1.2))


def test_kernel_tokens():
    doc = _minimal_problem(kernel=[{"a": 1.0}, {"a": 0.5, "ts": 1.0}])
    problem = problem_from_dict(doc).value
    assert problem.kernel == Kernel((KernelToken(1.0), KernelToken(0.5, ts_exp=1.0)))

    with pytest.raises(ProblemFormatError) as info:
        problem_from_dict(_minimal_problem(kernel=[{"a": 1.0, "s": -0.5}]))
    assert info.value.path == "kernel"


def test_negative_exponent_below_minus_one():
    doc = {"schema": 1, "terms": [{"coef": "crisp:1", "exponent": -1.5}]}
    with pytest.raises(ProblemFormatError) as info:
        solution_from_dict(doc)
    assert info.value.path == "terms/0"


def test_syntax_error_reports_line():
    with pytest.raises(ProblemFormatError) as info:
        loads_problem('{\n  "schema": 1,\n  "q": ,\n}', "broken.json")
    assert info.value.line == 3
    assert "broken.json:3:" in str(info.value)


def test_schema_version_is_checked():
    with pytest.raises(ProblemFormatError):
        problem_from_dict(_minimal_problem(schema=2))
    with pytest.raises(ProblemFormatError):
        problem_from_dict([1, 2, 3])


def test_repair_is_opt_in():
    lower = list(np.linspace(0.0, 1.0, 11))
    lower[3] = 0.1
    upper = list(np.linspace(2.0, 1.0, 11))
    doc = _minimal_problem(levels=11, u0={"lower": lower, "upper": upper})

    with pytest.raises(ProblemFormatError) as info:
        problem_from_dict(doc)
    assert info.value.path == "u0"

    decoded = problem_from_dict(doc, allow_repair=True)
    assert len(decoded.repairs) == 1
    assert "u0" in decoded.repairs[0]
    assert np.all(np.diff(decoded.value.u0.lower) >= 0.0)


def test_repair_never_fixes_non_finite():
    doc = _minimal_problem(levels=3, u0={"lower": [0.0, float("nan"), 1.0], "upper": [2.0, 2.0, 1.0]})
    with pytest.raises(ProblemFormatError):
        problem_from_dict(doc, allow_repair=True)


def test_levels_mismatch():
    doc = _minimal_problem(levels=11, u0={"levels": 21, "lower": [0.0] * 21, "upper": [0.0] * 21})
    with pytest.raises(ProblemFormatError) as info:
        problem_from_dict(doc)
    assert "21 levels" in str(info.value)


def test_load_files(tmp_path, c123):
    problem_path = tmp_path / "problem.json"
    solution_path = tmp_path / "solution.json"
    problem_path.write_text(dumps_problem(example1_problem(0.3, c123.grid)), encoding="utf-8")
    solution_path.write_text(dumps_solution(power(c123, 0.5)), encoding="utf-8")

    problem = load_problem(problem_path)
    assert problem.source == str(problem_path)
    assert problem.value.q == 0.3
    assert load_solution(solution_path).value.exponents == (0.5,)

    with pytest.raises(ProblemFormatError):
        load_problem(tmp_path / "missing.json")


def test_bare_problem_document_takes_grid_from_its_fuzzy_numbers():
    doc = {
        "q": 0.5,
        "b": 1.0,
        "u0": {"levels": 3, "lower": [0.0, 0.5, 1.0], "upper": [2.0, 1.5, 1.0]},
        "rhs": {"sum": ["u", "tu"]},
        "kernel": "one",
    }
    problem = problem_from_dict(doc).value
    assert problem.grid.level_count == 3
    assert problem.u0.level(0.5) == (0.5, 1.5)
    assert problem_to_dict(problem)["schema"] == 1


def test_bare_solution_document():
    doc = {"terms": [{"coef": {"levels": 5, "lower": [0, 1, 2, 3, 4], "upper": [8, 7, 6, 5, 4]}, "exponent": 0.5}]}
    solution = solution_from_dict(doc).value
    assert solution.grid.level_count == 5
    assert solution_from_dict({"terms": [{"coef": "tri:1,2,3", "exponent": 0.0}]}).value.grid.level_count == 101
