"""
MULTIPOLY Norm Commands
Sup-norm brackets, continuity certificates and polarization
"""

import logging
from pathlib import Path

from core.dispatcher import CommandCategory, CommandOutcome, RunConfig, command, flag
from core.errors import MalformedInput
from core.norms import continuity_certificate, sup_norm_components
from core.polarize import form_norm_bounds, form_to_dict, to_symmetric_form

from .common import dump, load_poly, load_vector

logger = logging.getLogger(__name__)


@command(
    "norm",
    CommandCategory.NORMS,
    "Bracket the sup norm over the product of unit balls",
    [
        flag("--in", dest="input", required=True, help="polynomial or {components: [...]} JSON"),
        flag("--no-exact", dest="no_exact", action="store_true",
             help="skip the vertex oracle for multilinear forms"),
        flag("--certify", action="store_true",
             help="also sample the continuity estimate |P(x)| <= ||P|| prod ||x_i||^n_i"),
    ],
)
def run_norm(config: RunConfig) -> CommandOutcome:
    """Estimate the norm of every component; vector outputs carry the sup norm"""
    V = load_vector(Path(config.options["input"]), "in", config.scalar_field)
    estimate = sup_norm_components(
        V.components, starts=config.starts, seed=config.seed, use_exact=not config.option("no_exact", False)
    )
    result = estimate.to_dict()
    passed = True
    if config.option("certify", False):
        reports = [continuity_certificate(P, seed=config.seed, tol=config.tol) for P in V.components]
        result["continuity"] = [
            {"samples": r.samples, "violations": r.violations, "coarse_violations": r.coarse_violations,
             "max_ratio": r.max_ratio, "witness_ratio": r.witness_ratio, "pass": r.passed}
            for r in reports
        ]
        passed = all(r.passed for r in reports)
    return CommandOutcome(dump(result), passed)


@command(
    "polarize",
    CommandCategory.POLARIZATION,
    "Symmetric form of a single-block polynomial and the norm sandwich",
    [
        flag("--in", dest="input", required=True, help="single-block polynomial JSON"),
        flag("--bounds", action="store_true", help="check ||P|| <= ||A|| <= m^m/m! ||P||"),
    ],
)
def run_polarize(config: RunConfig) -> CommandOutcome:
    P = load_poly(Path(config.options["input"]), "in", config.scalar_field)
    if not P.is_single_block:
        raise MalformedInput(f"field 'multidegree': polarize needs one block, got {P.m}")
    form = to_symmetric_form(P)
    result = {"form": form_to_dict(form)}
    passed = True
    if config.option("bounds", False):
        report = form_norm_bounds(form, tol=config.tol, seed=config.seed)
        result["bounds"] = report.to_dict()
        passed = report.passed
    return CommandOutcome(dump(result), passed)
