"""Shared fixtures and hypothesis strategies."""
from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import strategies as st

from fuzzfrac.analysis.fuzzy import AlphaGrid, FuzzyNumber, crisp, from_levels, triangular
from fuzzfrac.analysis.utils import DATA_DIR

SMALL_GRID = AlphaGrid(11)

finite_floats = st.floats(
    min_value=-1e3,
    max_value=1e3,
    allow_nan=False,
    allow_infinity=False,
    allow_subnormal=False,
)
steps = st.floats(min_value=0.0, max_value=10.0, allow_nan=False, allow_subnormal=False)


@st.composite
def fuzzy_numbers(draw, grid: AlphaGrid = SMALL_GRID, non_crisp: bool = False) -> FuzzyNumber:
    """Valid fuzzy numbers built from a start point and nonnegative increments."""
    m = grid.m
    start = draw(finite_floats)
    rises = np.array(draw(st.lists(steps, min_size=m, max_size=m)))
    falls = np.array(draw(st.lists(steps, min_size=m, max_size=m)))
    core = draw(st.floats(min_value=0.01 if non_crisp else 0.0, max_value=10.0))

    lower = start + np.concatenate(([0.0], np.cumsum(rises)))
    top = lower[-1] + core
    upper = top + np.concatenate((np.cumsum(falls[::-1])[::-1], [0.0]))
    return from_levels(grid, lower, upper)


def ulp_close(actual, expected, ulps: int, magnitude) -> bool:
    """True when |actual - expected| is within ulps units in the last place of magnitude."""
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    scale = np.maximum(np.abs(np.asarray(magnitude, dtype=float)), np.finfo(float).tiny)
    return bool(np.all(np.abs(actual - expected) <= ulps * np.spacing(scale)))


@pytest.fixture
def grid() -> AlphaGrid:
    return AlphaGrid()


@pytest.fixture
def small_grid() -> AlphaGrid:
    return SMALL_GRID


@pytest.fixture
def c123(grid) -> FuzzyNumber:
    return triangular(1.0, 2.0, 3.0, grid)


@pytest.fixture
def c012(grid) -> FuzzyNumber:
    return triangular(0.0, 1.0, 2.0, grid)


@pytest.fixture
def c_negative(grid) -> FuzzyNumber:
    return triangular(-3.0, -2.0, -1.0, grid)


@pytest.fixture
def two(grid) -> FuzzyNumber:
    return crisp(2.0, grid)


@pytest.fixture
def golden():
    def load(name: str) -> dict:
        return json.loads((DATA_DIR / "golden" / name).read_text(encoding="utf-8"))

    return load


def assert_matches_golden(actual, expected, rel: float = 1e-9, path: str = "") -> None:
    """Structure must match exactly; floats to a relative tolerance."""
    if isinstance(expected, dict):
        assert isinstance(actual, dict), path
        assert sorted(actual) == sorted(expected), path
        for key in expected:
            assert_matches_golden(actual[key], expected[key], rel, f"{path}/{key}")
    elif isinstance(expected, list):
        assert isinstance(actual, list) and len(actual) == len(expected), path
        for i, (a, e) in enumerate(zip(actual, expected)):
            assert_matches_golden(a, e, rel, f"{path}/{i}")
    elif isinstance(expected, float) and not isinstance(expected, bool):
        assert isinstance(actual, (int, float)), path
        assert math.isclose(actual, expected, rel_tol=rel, abs_tol=1e-300), path
    else:
        assert actual == expected, path
