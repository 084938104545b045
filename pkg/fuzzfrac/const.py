"""Constants for fuzzfrac."""
from __future__ import annotations

VERSION = "0.1.0"

ENV_LOG_LEVEL = "FUZZFRAC_LOG"
DEFAULT_LOG_LEVEL = "WARNING"

# Fuzzy number representation
DEFAULT_ALPHA_LEVELS = 101
COMPARISON_TOL = 1e-12

# Calculus
MIN_NODES = 16
DEFAULT_NODES = 2000
EXPONENT_TOL = 1e-12

# Verification
DEFAULT_GRID_POINTS = 200
MIN_GRID_POINTS = 10
DEFAULT_TOL = 1e-8
DEFAULT_TOL_IC = 1e-2
DEFAULT_IC_TIMES = (1e-3, 1e-4, 1e-5)
T_GRID_MIN_RATIO = 1e-4
SIGN_THRESHOLD = 1e-14
SURVEY_POINTS = 50
WITNESS_TRIANGLE = (0.0, 1.0, 2.0)

METHOD_EXACT = "exact"
METHOD_QUADRATURE = "quadrature"

SIGN_POSITIVE = "positive"
SIGN_NEGATIVE = "negative"
SIGN_ZERO = "zero"

SIDE_LOWER = "lower"
SIDE_UPPER = "upper"

# Reports
REPORT_SCHEMA_VERSION = 1
FORMAT_JSON = "json"
FORMAT_CSV = "csv"
CSV_COLUMNS = ("t", "residual", "coef1_sign", "ordering_ok")

# CLI exit codes
EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_VERIFICATION_FAILED = 2

# Preset keys (see data/presets.json)
PRESET_EXAMPLE1 = "example1"
PRESET_EXAMPLE2 = "example2"
