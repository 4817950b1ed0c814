"""
MULTIPOLY Composition Commands
Ideal and hyper-ideal inequality checks and summing ratios
"""

import logging
from pathlib import Path

from core.compose import HyperIneqConfig, hyper_inequality_report, ideal_inequality_report, summing_is_null, summing_ratio
from core.dispatcher import CommandCategory, CommandOutcome, RunConfig, command, flag

from .common import dump, load_family, load_map, load_vector, parse_floats, parse_paths

logger = logging.getLogger(__name__)


@command(
    "compose-check",
    CommandCategory.COMPOSITION,
    "Check ||t o P o (u_j)|| <= ||t|| ||P|| prod ||u_j||^n_j",
    [
        flag("--t", dest="t", required=True, help="outer linear map JSON"),
        flag("--P", dest="P", required=True, help="polynomial JSON"),
        flag("--u", dest="u", required=True, help="comma-separated inner linear map JSON files"),
    ],
)
def run_compose_check(config: RunConfig) -> CommandOutcome:
    t = load_map(Path(config.options["t"]), "t")
    P = load_vector(Path(config.options["P"]), "P", config.scalar_field)
    us = [load_map(path, "u") for path in parse_paths(config.options["u"], "u")]
    report = ideal_inequality_report(t, P, us, tol=config.tol, starts=config.starts, seed=config.seed)
    return CommandOutcome(dump(report.to_dict()), report.passed)


@command(
    "hyper-check",
    CommandCategory.COMPOSITION,
    "Check the hyper-ideal inequality for R o P o (Q_1, ..., Q_n)",
    [
        flag("--R", dest="R", required=True, help="outer single-block polynomial JSON"),
        flag("--P", dest="P", required=True, help="middle polynomial JSON"),
        flag("--Q", dest="Q", required=True, help="comma-separated inner polynomial JSON files"),
        flag("--C", dest="C", default="1", help="comma-separated C_1, C_2, ... (C_1 = 1)"),
        flag("--K", dest="K", default="1", help="comma-separated K_1, K_2, ... (K_1 = 1)"),
    ],
)
def run_hyper_check(config: RunConfig) -> CommandOutcome:
    field = config.scalar_field
    R = load_vector(Path(config.options["R"]), "R", field)
    P = load_vector(Path(config.options["P"]), "P", field)
    Qs = [load_vector(path, "Q", field) for path in parse_paths(config.options["Q"], "Q")]
    constants = HyperIneqConfig(
        parse_floats(config.option("C", "1"), "C"),
        parse_floats(config.option("K", "1"), "K"),
        config.tol,
    )
    report = hyper_inequality_report(R, P, Qs, constants, starts=config.starts, seed=config.seed)
    return CommandOutcome(dump(report.to_dict()), report.passed)


@command(
    "summing",
    CommandCategory.COMPOSITION,
    "Ratio of summed values to the product of weak lq norms",
    [
        flag("--P", dest="P", required=True, help="polynomial JSON"),
        flag("--families", required=True, help="comma-separated JSON files, each a list of vectors"),
        flag("--p", dest="p", type=float, required=True, help="outer exponent"),
        flag("--q", dest="q", required=True, help="comma-separated weak exponents, one per block"),
        flag("--mode", choices=["abs", "full"], default="abs", help="diagonal or full sum"),
    ],
)
def run_summing(config: RunConfig) -> CommandOutcome:
    P = load_vector(Path(config.options["P"]), "P", config.scalar_field)
    families = [load_family(path, "families") for path in parse_paths(config.options["families"], "families")]
    qs = parse_floats(config.options["q"], "q")
    p = config.options["p"]
    report = summing_ratio(P, families, p, qs, config.option("mode", "abs"))
    result = report.to_dict()
    result["null_regime"] = summing_is_null(P.multidegree, p, qs)
    return CommandOutcome(dump(result))
