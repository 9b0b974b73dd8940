"""
Constants for the Fraisse workbench.
"""

import os


# Application name
APP_NAME = "FraisseWorkbench"

# Application version
APP_VERSION = "0.3"

# Enumeration guard: free relation instances decided by brute force in one
# completion step (2^guard candidate assignments)
DEFAULT_ENUMERATION_GUARD = 24

# Isomorphism guard: elements per sort for canonical forms
DEFAULT_ISOMORPHISM_GUARD = 8

# Largest n for which exact Bell numbers are tabulated
DEFAULT_BELL_TABLE_MAX = 1024

# Highest level auto-certified before unbounded sampling of an uncertified class
DEFAULT_CERTIFY_MAX_LEVEL = 4

# Harness defaults
DEFAULT_HALF_WIDTH_TARGET = 0.02
DEFAULT_TRIAL_BATCH = 16
DEFAULT_CONFIDENCE = 0.95
DEFAULT_THREADS = 1
THREADS_ENV_VAR = "FRAISSE_THREADS"

# Sampler modes
MODE_UNBOUNDED = "unbounded"
MODE_BOUNDED = "bounded"
MODE_UNIFORM_EXHAUSTIVE = "uniform-exhaustive"
MODE_UNIFORM_PARTITIONS = "uniform-partitions"
SAMPLER_MODES = [
    MODE_UNBOUNDED,
    MODE_BOUNDED,
    MODE_UNIFORM_EXHAUSTIVE,
    MODE_UNIFORM_PARTITIONS,
]

# Experiment measures
MEASURE_MU = "mu"
MEASURE_UNIFORM = "uniform"
MEASURES = [MEASURE_MU, MEASURE_UNIFORM]

# solve_partial policies
POLICY_FIRST = "first"
POLICY_UNIFORM = "uniform"
POLICY_EXHAUSTIVE = "exhaustive"
SOLVE_POLICIES = [POLICY_FIRST, POLICY_UNIFORM, POLICY_EXHAUSTIVE]

# Output formats for summarize()
FORMAT_CSV = "csv"
FORMAT_JSON = "json"
FORMAT_TABLE = "table"
OUTPUT_FORMATS = [FORMAT_CSV, FORMAT_JSON, FORMAT_TABLE]

# Versioned schemas for JSON outputs
RESULT_SCHEMA_VERSION = 1
SPEC_SCHEMA_VERSION = 1

# Name of the synthetic row recording whole-battery success
BATTERY_ROW = "(battery)"

# CLI exit codes
EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_AMALGAMATION_FAILURE = 2

# Debug log location used by --debug
DEBUG_LOG_PATH = os.path.expanduser("~/.cache/fraisse/debug.log")
