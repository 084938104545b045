"""Utility helpers for fuzzfrac analysis."""
from __future__ import annotations

from dataclasses import dataclass
import json
from pathlib import Path
from typing import Any

import numpy as np

from ..const import SIGN_NEGATIVE, SIGN_POSITIVE, SIGN_THRESHOLD, SIGN_ZERO, T_GRID_MIN_RATIO
from ..exceptions import DomainError, ProblemFormatError

DATA_DIR = Path(__file__).resolve().parents[1] / "data"


@dataclass(frozen=True)
class JsonLoadResult:
    """Parsed JSON document and where it came from."""

    data: Any
    source: str


def load_json_resource(path: Path) -> JsonLoadResult:
    """Load a JSON file shipped with the package."""
    raw = path.read_text(encoding="utf-8")
    return JsonLoadResult(data=json.loads(raw), source=str(path))


def load_json_document(path: Path | str) -> JsonLoadResult:
    """Load a user-supplied JSON file, reporting syntax errors by line and column."""
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ProblemFormatError(f"cannot read file: {err.strerror}", source=str(path)) from err
    return parse_json_text(raw, source=str(path))


def parse_json_text(raw: str, source: str = "<input>") -> JsonLoadResult:
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as err:
        raise ProblemFormatError(
            err.msg, source=source, line=err.lineno, column=err.colno
        ) from err
    return JsonLoadResult(data=data, source=source)


def dumps_canonical(payload: Any) -> str:
    """Serialize to the canonical JSON text used for files and reports."""
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"


def log_time_grid(b: float, points: int, min_ratio: float = T_GRID_MIN_RATIO) -> np.ndarray:
    """Log-spaced times in (0, b], ascending, ending exactly at b."""
    if b <= 0.0:
        raise DomainError(f"domain endpoint must be positive, got {b!r}")
    if points < 2:
        raise DomainError(f"a time grid needs at least 2 points, got {points!r}")
    grid = np.geomspace(b * min_ratio, b, points)
    grid[-1] = b
    return grid


def classify_sign(value: float, threshold: float = SIGN_THRESHOLD) -> str:
    """Return a sign label for value, treating |value| <= threshold as zero."""
    if value > threshold:
        return SIGN_POSITIVE
    if value < -threshold:
        return SIGN_NEGATIVE
    return SIGN_ZERO


def finite_or_none(value: float | None) -> float | None:
    """Map NaN and infinities to None so reports stay strict JSON."""
    if value is None:
        return None
    value = float(value)
    return value if np.isfinite(value) else None
