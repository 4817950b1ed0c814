"""
MULTIPOLY Polarization
Symmetric multilinear forms and their diagonal polynomials
"""

import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import BudgetExceeded, MalformedInput
from .mpcore import (
    CoefficientKey,
    Field,
    MultiDegree,
    MultiIndex,
    MultiPolynomial,
    Scalar,
    Vector,
    evaluate_batch,
    mp_validate,
    multinomial,
)
from .norms import NormEstimate, sup_norm_estimate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SymmetricForm:
    """
    Symmetric n-linear form on K^d stored by its values on sorted basis tuples

    A(e_i1, ..., e_in) for every permutation of a tuple is the value stored
    under the sorted tuple. Unsorted keys are sorted on construction.
    """
    arity: int
    dim: int
    coeffs: Dict[Tuple[int, ...], Scalar] = field(default_factory=dict)
    field: Field = Field.REAL

    def __post_init__(self):
        if self.arity < 1 or self.dim < 1:
            raise MalformedInput(f"form needs arity >= 1 and dim >= 1, got ({self.arity}, {self.dim})")
        scalar_field = Field.parse(self.field)
        canonical: Dict[Tuple[int, ...], Scalar] = {}
        for key, value in self.coeffs.items():
            key = tuple(int(i) for i in key)
            if len(key) != self.arity:
                raise MalformedInput(f"form key {key} has length {len(key)}, expected {self.arity}")
            if any(not 0 <= i < self.dim for i in key):
                raise MalformedInput(f"form key {key} out of range for dimension {self.dim}")
            value = scalar_field.coerce(value)
            ordered = tuple(sorted(key))
            if ordered in canonical and canonical[ordered] != value:
                raise MalformedInput(f"form keys {key} and {ordered} disagree; the form would not be symmetric")
            canonical[ordered] = value
        canonical = {k: canonical[k] for k in sorted(canonical) if canonical[k] != 0}
        object.__setattr__(self, "field", scalar_field)
        object.__setattr__(self, "coeffs", canonical)

    def value(self, indices: Sequence[int]) -> Scalar:
        return self.coeffs.get(tuple(sorted(indices)), 0.0)

    def dense(self) -> np.ndarray:
        tensor = np.zeros((self.dim,) * self.arity, dtype=self.field.dtype)
        for key, value in self.coeffs.items():
            for perm in set(itertools.permutations(key)):
                tensor[perm] = value
        return tensor


@dataclass
class FormNormReport:
    arity: int
    factor: float
    poly: NormEstimate
    form: NormEstimate
    tol: float

    @property
    def lower_poly(self) -> float:
        return self.poly.lower

    @property
    def lower_form(self) -> float:
        return self.form.lower

    @property
    def poly_within_form(self) -> bool:
        """||A^|| <= ||A||, checked with the lower end of ||A^||"""
        return self.poly.lower <= self.form.upper * (1 + self.tol)

    @property
    def form_within_factor(self) -> bool:
        """||A|| <= m^m/m! ||A^||, checked with the lower end of ||A||"""
        return self.form.lower <= self.factor * self.poly.upper * (1 + self.tol)

    @property
    def passed(self) -> bool:
        return self.poly_within_form and self.form_within_factor

    def to_dict(self) -> Dict[str, Any]:
        return {
            "arity": self.arity,
            "factor": self.factor,
            "poly": self.poly.to_dict(),
            "form": self.form.to_dict(),
            "poly_within_form": self.poly_within_form,
            "form_within_factor": self.form_within_factor,
            "pass": self.passed,
        }


def sandwich_factor(arity: int) -> float:
    """m^m / m!"""
    return arity ** arity / math.factorial(arity)


def _single_block_degree(Phat: MultiPolynomial) -> int:
    if not Phat.is_single_block:
        raise MalformedInput(f"polarization needs a single-block polynomial, got m = {Phat.m}")
    return Phat.multidegree[0]


def polarization_value(Phat: MultiPolynomial, xs: Sequence[Vector], x0: Optional[Vector] = None) -> Scalar:
    """
    A(x_1, ..., x_n) = 1/(n! 2^n) sum over signs e of e_1...e_n Phat(x0 + e_1 x_1 + ... + e_n x_n)

    The sign sum is enumerated exactly; the result does not depend on x0.

    Raises:
        MalformedInput: wrong number or length of vectors
        BudgetExceeded: n above POLARIZATION_MAX_ARITY
    """
    from config import POLARIZATION_MAX_ARITY

    n = _single_block_degree(Phat)
    if n > POLARIZATION_MAX_ARITY:
        raise BudgetExceeded("polarization sign sum", 2 ** n, 2 ** POLARIZATION_MAX_ARITY)
    d = Phat.dims[0]
    if len(xs) != n:
        raise MalformedInput(f"polarization of degree {n} needs {n} vectors, got {len(xs)}")
    X = np.array([np.asarray(x) for x in xs])
    if X.shape != (n, d):
        raise MalformedInput(f"polarization vectors must have length {d}")
    base = np.zeros(d) if x0 is None else np.asarray(x0)
    if base.shape != (d,):
        raise MalformedInput(f"x0 must have length {d}")

    signs = 1 - 2 * ((np.arange(2 ** n)[:, None] >> np.arange(n)[None, :]) & 1)
    points = base[None, :] + signs @ X
    values = evaluate_batch(Phat, [points])
    total = np.prod(signs, axis=1) @ values
    value = total / (math.factorial(n) * 2 ** n)
    return value.item() if hasattr(value, "item") else value


def to_symmetric_form(Phat: MultiPolynomial) -> SymmetricForm:
    """
    The unique symmetric form whose diagonal is Phat

    A monomial c x^beta spreads evenly over the n!/beta! index tuples with
    multiset beta, so the sorted tuple stores c beta!/n!.
    """
    n = _single_block_degree(Phat)
    report = mp_validate(Phat)
    if not report.ok:
        raise MalformedInput(f"polynomial fails validation: {report.violations[0].reason}")
    coeffs: Dict[Tuple[int, ...], Scalar] = {}
    for key, value in Phat.terms.items():
        alpha = key.alphas[0]
        indices = tuple(i for i, e in alpha.exponents for _ in range(e))
        coeffs[indices] = value / multinomial([e for _, e in alpha.exponents])
    return SymmetricForm(n, Phat.dims[0], coeffs, Phat.field)


def poly_from_form(A: SymmetricForm) -> MultiPolynomial:
    """A^(x) = A(x, ..., x)"""
    terms: Dict[CoefficientKey, Scalar] = {}
    for indices, value in A.coeffs.items():
        counts = Counter(indices)
        alpha = MultiIndex(tuple(sorted(counts.items())))
        terms[CoefficientKey((alpha,))] = value * multinomial(list(counts.values()))
    return MultiPolynomial(A.field, MultiDegree((A.arity,)), (A.dim,), terms)


def form_value(A: SymmetricForm, xs: Sequence[Vector]) -> Scalar:
    if len(xs) != A.arity:
        raise MalformedInput(f"form of arity {A.arity} needs {A.arity} vectors, got {len(xs)}")
    value = A.dense()
    for x in xs:
        x = np.asarray(x)
        if x.shape != (A.dim,):
            raise MalformedInput(f"form vectors must have length {A.dim}")
        value = np.tensordot(x, value, axes=([0], [0]))
    return value.item()


def form_as_multilinear(A: SymmetricForm) -> MultiPolynomial:
    """A as an (1, ..., 1)-homogeneous polynomial on (K^d)^n"""
    terms: Dict[CoefficientKey, Scalar] = {}
    for indices, value in A.coeffs.items():
        for perm in set(itertools.permutations(indices)):
            terms[CoefficientKey(tuple(MultiIndex(((i, 1),)) for i in perm))] = value
    return MultiPolynomial(A.field, MultiDegree((1,) * A.arity), (A.dim,) * A.arity, terms)


def form_norm_bounds(
    A: SymmetricForm,
    poly_estimate: Optional[NormEstimate] = None,
    form_estimate: Optional[NormEstimate] = None,
    tol: Optional[float] = None,
    seed: Optional[int] = None,
) -> FormNormReport:
    """
    Check ||A^|| <= ||A|| <= m^m/m! ||A^||

    Args:
        A: symmetric form
        poly_estimate: bracket of ||A^||; estimated when omitted
        form_estimate: bracket of ||A||; estimated when omitted
        tol: relative slack of both checks
        seed: seed of the estimates computed here
    """
    from config import DEFAULT_TOL

    tol = DEFAULT_TOL if tol is None else tol
    poly_estimate = poly_estimate or sup_norm_estimate(poly_from_form(A), seed=seed)
    form_estimate = form_estimate or sup_norm_estimate(form_as_multilinear(A), seed=seed)
    report = FormNormReport(A.arity, sandwich_factor(A.arity), poly_estimate, form_estimate, tol)
    if not report.passed:
        logger.warning(f"Norm sandwich failed for arity {A.arity}: "
                       f"poly {poly_estimate.lower:.6g}..{poly_estimate.upper:.6g}, "
                       f"form {form_estimate.lower:.6g}..{form_estimate.upper:.6g}")
    return report


# ══════════════════════════════════════════════════════════════════════════════
# JSON
# ══════════════════════════════════════════════════════════════════════════════

def form_to_dict(A: SymmetricForm) -> Dict[str, Any]:
    entries = []
    for key, value in A.coeffs.items():
        value = complex(value)
        entries.append({"key": list(key), "re": value.real, "im": value.imag})
    return {"arity": A.arity, "dim": A.dim, "field": A.field.value, "entries": entries}


def form_from_dict(data: Mapping[str, Any]) -> SymmetricForm:
    if not isinstance(data, Mapping):
        raise MalformedInput("form must be a JSON object")
    try:
        arity, dim = int(data["arity"]), int(data["dim"])
        entries: List[Mapping[str, Any]] = data["entries"]
        coeffs = {
            tuple(int(i) for i in e["key"]): complex(float(e["re"]), float(e.get("im", 0.0)))
            for e in entries
        }
    except KeyError as e:
        raise MalformedInput(f"missing field {e}")
    except (TypeError, ValueError) as e:
        raise MalformedInput(f"form entries: {e}")
    return SymmetricForm(arity, dim, coeffs, Field.parse(data.get("field", "real")))

