"""
MULTIPOLY Configuration Module
Central configuration for all numerical and runtime parameters
"""

import os
from pathlib import Path

try:
    import psutil
except ImportError:  # pragma: no cover
    psutil = None

# ══════════════════════════════════════════════════════════════════════════════
# PATH CONFIGURATION
# ══════════════════════════════════════════════════════════════════════════════

BASE_DIR = Path(__file__).parent.parent
LOGS_DIR = Path(os.environ.get("MULTIPOLY_LOG_DIR", BASE_DIR / "logs"))

# ══════════════════════════════════════════════════════════════════════════════
# IDENTITY
# ══════════════════════════════════════════════════════════════════════════════

PROJECT_NAME = "multipoly"
VERSION = "1.0.0"

# ══════════════════════════════════════════════════════════════════════════════
# RUNTIME
# ══════════════════════════════════════════════════════════════════════════════


def _default_workers() -> int:
    if psutil is not None:
        return psutil.cpu_count(logical=False) or 1
    return os.cpu_count() or 1


def _worker_count(requested: str) -> int:
    """MULTIPOLY_THREADS lowers the worker count, never raises it past the cores"""
    cores = _default_workers()
    requested = requested.strip()
    if requested.isdigit():
        return max(1, min(int(requested), cores))
    return cores


MAX_WORKERS = _worker_count(os.environ.get("MULTIPOLY_THREADS", ""))

DEFAULT_SEED = 1
DEFAULT_TOL = 1e-6

# ══════════════════════════════════════════════════════════════════════════════
# NORM ESTIMATION
# ══════════════════════════════════════════════════════════════════════════════

DEFAULT_STARTS = 64
LARGE_STARTS = 256          # used by scans once the vertex budget is exceeded
ASCENT_SWEEP_LIMIT = 200    # full coordinate cycles per start
STAGNATION_TOL = 1e-10
UNIVARIATE_TOL = 1e-12
COMPLEX_PHASE_SAMPLES = 16
VERTEX_BUDGET = 2 ** 22     # sign vertices enumerated by the exact multilinear oracle
VERTEX_CHUNK = 2 ** 14

CONTINUITY_TOL = 1e-9
CONTINUITY_SAMPLES = 1000
BALL_TRANSFER_SLACK = 0.05
BALL_TRANSFER_PROBES = 2000

# ══════════════════════════════════════════════════════════════════════════════
# ALGEBRA
# ══════════════════════════════════════════════════════════════════════════════

TERM_BUDGET = 10 ** 6               # intermediate monomials allowed in a composition
POLARIZATION_MAX_ARITY = 12
INTERPOLATION_RESIDUAL_TOL = 1e-8
INTERPOLATION_CHOP = 1e-11          # relative; smaller recovered coefficients are zero
INTERPOLATION_CHECK_POINTS = 8

# ══════════════════════════════════════════════════════════════════════════════
# BOHNENBLUST-HILLE LAB
# ══════════════════════════════════════════════════════════════════════════════

KSZ_MAX_RETRIES = 3
SLOPE_TOL = 0.15
DEFAULT_SEEDS_PER_R = 5

# ══════════════════════════════════════════════════════════════════════════════
# CLI / OUTPUT
# ══════════════════════════════════════════════════════════════════════════════

CSV_FLOAT_FORMAT = ".17g"
CSV_COLUMNS = [
    "n", "p", "r", "seed", "norm_lower", "norm_upper",
    "lp_norm", "ratio_lower", "ratio_upper",
]
COMMAND_MATCH_THRESHOLD = 80   # 0-100, rapidfuzz score needed to accept a misspelt command

EXIT_OK = 0
EXIT_MALFORMED = 1
EXIT_CHECK_FAILED = 2

# ══════════════════════════════════════════════════════════════════════════════
# LOGGING CONFIGURATION
# ══════════════════════════════════════════════════════════════════════════════

LOG_FILE = LOGS_DIR / "multipoly.log"
LOG_LEVEL = "DEBUG"  # DEBUG, INFO, WARNING, ERROR, CRITICAL
LOG_FORMAT = "%(asctime)s | %(levelname)-8s | %(name)-20s | %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
LOG_MAX_SIZE = 10 * 1024 * 1024  # 10 MB
LOG_BACKUP_COUNT = 5

# ══════════════════════════════════════════════════════════════════════════════
# FEATURE FLAGS
# ══════════════════════════════════════════════════════════════════════════════

ENABLE_FILE_LOG = os.environ.get("MULTIPOLY_FILE_LOG", "1") != "0"
DEBUG_MODE = os.environ.get("MULTIPOLY_DEBUG", "0") == "1"
