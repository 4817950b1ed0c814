"""
MULTIPOLY Bohnenblust-Hille Commands
Ratio scans over random-sign instances and single-instance inspection
"""

import logging
from pathlib import Path

from core.bhlab import bh_exponent, ksz_build, ksz_lift, ksz_norm, ratio_scan
from core.dispatcher import CommandCategory, CommandOutcome, RunConfig, command, flag
from core.errors import MalformedInput
from core.mpcore import MultiDegree, to_json
from core.norms import lp_coeff_norm

from .common import dump, parse_ints

logger = logging.getLogger(__name__)


@command(
    "bh-scan",
    CommandCategory.BH_LAB,
    "CSV of coefficient-norm / sup-norm ratios of lifted random-sign forms",
    [
        flag("--n", dest="n", required=True, help="multidegree, e.g. 1,1"),
        flag("--p", dest="p", type=float, help="coefficient exponent (default: the critical exponent)"),
        flag("--r", dest="r", required=True, help="ascending slot dimensions, e.g. 2,4,8"),
        flag("--seeds", type=int, help="instances per r"),
        flag("--summary", help="write the fit summary JSON here"),
        flag("--check-slope", dest="check_slope", action="store_true",
             help="fail unless the fitted slope is within SLOPE_TOL of the expected one"),
    ],
)
def run_bh_scan(config: RunConfig) -> CommandOutcome:
    from config import SLOPE_TOL

    n = MultiDegree.of(parse_ints(config.options["n"], "n"))
    p = config.option("p", bh_exponent(n))
    result = ratio_scan(
        n, p, parse_ints(config.options["r"], "r"),
        seeds_per_r=config.option("seeds"), starts=config.starts, seed=config.seed,
    )
    files = {}
    if config.option("summary"):
        files[Path(config.options["summary"])] = result.summary_json() + "\n"
    passed = True
    if config.option("check_slope", False):
        passed = abs(result.fitted_slope - result.expected_slope) <= SLOPE_TOL
    return CommandOutcome(result.to_csv(), passed, files)


@command(
    "ksz",
    CommandCategory.BH_LAB,
    "Build one random-sign instance, lift it and bracket its norm",
    [
        flag("--r", dest="r", type=int, required=True, help="slot dimension"),
        flag("--n", dest="n", required=True, help="multidegree of the lift"),
        flag("--save", help="write the lifted polynomial JSON here"),
    ],
)
def run_ksz(config: RunConfig) -> CommandOutcome:
    n = MultiDegree.of(parse_ints(config.options["n"], "n"))
    r = config.options["r"]
    if r < 1:
        raise MalformedInput(f"field 'r' must be >= 1, got {r}")
    from config import DEFAULT_SEED

    inst = ksz_build(r, n.total, DEFAULT_SEED if config.seed is None else config.seed)
    P_r = ksz_lift(inst, n)
    estimate = ksz_norm(inst, n, starts=config.starts)
    exponents = [1.0, bh_exponent(n), 2.0]
    result = {
        "r": r,
        "n": list(n.degrees),
        "M": n.total,
        "seed": inst.seed,
        "coefficients": inst.size,
        "norm": estimate.to_dict(),
        "lp_norms": [{"p": p, "value": lp_coeff_norm(P_r, p)} for p in exponents],
    }
    files = {Path(config.options["save"]): to_json(P_r)} if config.option("save") else {}
    return CommandOutcome(dump(result), True, files)
