"""
MULTIPOLY Core Model
Multi-homogeneous polynomials on K^d1 x ... x K^dm: representation, validation,
evaluation, finite-type construction and coefficient recovery from values
"""

import hashlib
import itertools
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property, lru_cache
from typing import Any, Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import MalformedInput, RecoveryFailure

logger = logging.getLogger(__name__)

Scalar = Union[float, complex]
Vector = Union[Sequence[Scalar], np.ndarray]


class Field(Enum):
    """Scalar field K of every space involved"""
    REAL = "real"
    COMPLEX = "complex"

    @classmethod
    def parse(cls, value: Union[str, "Field"]) -> "Field":
        if isinstance(value, Field):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise MalformedInput(f"field: expected 'real' or 'complex', got {value!r}")

    @property
    def dtype(self):
        return np.float64 if self is Field.REAL else np.complex128

    def coerce(self, value: Any) -> Scalar:
        """Convert a scalar into this field's Python type"""
        if self is Field.COMPLEX:
            return complex(value)
        value = complex(value)
        if value.imag != 0.0:
            raise MalformedInput(f"complex coefficient {value} in a real polynomial")
        return float(value.real)


# ══════════════════════════════════════════════════════════════════════════════
# COMBINATORICS
# ══════════════════════════════════════════════════════════════════════════════

def weak_compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """All tuples of `parts` non-negative integers summing to `total`, lexicographically descending"""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in weak_compositions(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _composition_table(total: int, parts: int) -> Tuple[Tuple[int, ...], ...]:
    return tuple(weak_compositions(total, parts))


def multinomial(counts: Sequence[int]) -> int:
    """|counts|! / prod(counts!) as an exact integer"""
    result = math.factorial(sum(counts))
    for c in counts:
        result //= math.factorial(c)
    return result


def expand_linear_power(row: Vector, power: int) -> Dict[Tuple[int, ...], Scalar]:
    """
    Expand (sum_k row[k] x_k)^power by the multinomial theorem

    Returns a map from dense exponent tuples to coefficients. The integer
    multinomial count is formed first and multiplied into the scalar product
    of the row entries once per monomial.
    """
    row = np.asarray(row)
    dim = len(row)
    support = [k for k in range(dim) if row[k] != 0]
    expansion: Dict[Tuple[int, ...], Scalar] = {}
    if power == 0:
        expansion[(0,) * dim] = 1
        return expansion
    for comp in _composition_table(power, len(support)):
        value = 1
        dense = [0] * dim
        for k, c in zip(support, comp):
            if c:
                value = value * row[k].item() ** c
                dense[k] = c
        expansion[tuple(dense)] = multinomial(comp) * value
    return expansion


# ══════════════════════════════════════════════════════════════════════════════
# DATA MODEL
# ══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True, order=True)
class MultiIndex:
    """Sparse exponent vector alpha: sorted (coordinate, exponent) pairs, exponents > 0"""
    exponents: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        previous = -1
        for index, power in self.exponents:
            if index < 0 or power <= 0:
                raise MalformedInput(f"multi-index entry ({index}, {power}) must have index >= 0 and exponent > 0")
            if index <= previous:
                raise MalformedInput("multi-index coordinates must be strictly increasing")
            previous = index

    @classmethod
    def from_dict(cls, mapping: Mapping[int, int]) -> "MultiIndex":
        return cls(tuple(sorted((int(i), int(e)) for i, e in mapping.items() if int(e) != 0)))

    @classmethod
    def from_dense(cls, vector: Sequence[int]) -> "MultiIndex":
        return cls(tuple((i, int(e)) for i, e in enumerate(vector) if e))

    @property
    def degree(self) -> int:
        return sum(power for _, power in self.exponents)

    @property
    def max_index(self) -> int:
        return self.exponents[-1][0] if self.exponents else -1

    def as_dict(self) -> Dict[int, int]:
        return dict(self.exponents)

    def to_dense(self, dim: int) -> Tuple[int, ...]:
        if self.max_index >= dim:
            raise MalformedInput(f"multi-index coordinate {self.max_index} out of range for dimension {dim}")
        dense = [0] * dim
        for index, power in self.exponents:
            dense[index] = power
        return tuple(dense)


def degree(alpha: MultiIndex) -> int:
    """|alpha| = sum of exponents"""
    return alpha.degree


@dataclass(frozen=True)
class MultiDegree:
    """The tuple (n_1, ..., n_m) and its total M"""
    degrees: Tuple[int, ...]

    def __post_init__(self):
        degrees = tuple(int(n) for n in self.degrees)
        if not degrees:
            raise MalformedInput("multidegree needs at least one block (m >= 1)")
        if any(n < 1 for n in degrees):
            raise MalformedInput(f"multidegree entries must be >= 1, got {degrees}")
        object.__setattr__(self, "degrees", degrees)

    @classmethod
    def of(cls, degrees: Union["MultiDegree", Sequence[int], int]) -> "MultiDegree":
        if isinstance(degrees, MultiDegree):
            return degrees
        if isinstance(degrees, int):
            return cls((degrees,))
        return cls(tuple(degrees))

    @property
    def m(self) -> int:
        return len(self.degrees)

    @property
    def total(self) -> int:
        return sum(self.degrees)

    def __iter__(self):
        return iter(self.degrees)

    def __len__(self):
        return len(self.degrees)

    def __getitem__(self, i: int) -> int:
        return self.degrees[i]


@dataclass(frozen=True, order=True)
class CoefficientKey:
    """One multi-index per block: alpha^(1), ..., alpha^(m)"""
    alphas: Tuple[MultiIndex, ...]

    @classmethod
    def of(cls, *blocks: Union[MultiIndex, Mapping[int, int]]) -> "CoefficientKey":
        return cls(tuple(b if isinstance(b, MultiIndex) else MultiIndex.from_dict(b) for b in blocks))

    @classmethod
    def from_dense(cls, blocks: Sequence[Sequence[int]]) -> "CoefficientKey":
        return cls(tuple(MultiIndex.from_dense(b) for b in blocks))

    def __len__(self):
        return len(self.alphas)


@dataclass(frozen=True)
class MultiPolynomial:
    """
    Scalar (n_1, ..., n_m)-homogeneous polynomial in canonical sparse form

    Terms are kept in lexicographic key order and exact zeros are dropped on
    construction, so equality is structural. Keys whose degrees or indices do
    not match the shape are stored as given; mp_validate reports them.
    """
    field: Field
    multidegree: MultiDegree
    dims: Tuple[int, ...]
    terms: Dict[CoefficientKey, Scalar] = field(default_factory=dict)

    def __post_init__(self):
        scalar_field = Field.parse(self.field)
        multidegree = MultiDegree.of(self.multidegree)
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != multidegree.m:
            raise MalformedInput(f"dims has {len(dims)} blocks but multidegree has {multidegree.m}")
        if any(d < 1 for d in dims):
            raise MalformedInput(f"block dimensions must be >= 1, got {dims}")
        for key in self.terms:
            if not isinstance(key, CoefficientKey) or len(key) != multidegree.m:
                raise MalformedInput(f"term key {key!r} does not have {multidegree.m} blocks")
        canonical: Dict[CoefficientKey, Scalar] = {}
        for key in sorted(self.terms):
            value = scalar_field.coerce(self.terms[key])
            if value != 0:
                canonical[key] = value
        object.__setattr__(self, "field", scalar_field)
        object.__setattr__(self, "multidegree", multidegree)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "terms", canonical)

    def __hash__(self):
        return hash(self.fingerprint())

    @classmethod
    def zero(cls, multidegree, dims, field: Field = Field.REAL) -> "MultiPolynomial":
        return cls(field, MultiDegree.of(multidegree), tuple(dims), {})

    @classmethod
    def from_dense_terms(
        cls,
        multidegree,
        dims: Sequence[int],
        terms: Mapping[Tuple[Tuple[int, ...], ...], Scalar],
        field: Field = Field.REAL,
    ) -> "MultiPolynomial":
        """Build from {(dense exponents block 1, ..., block m): coefficient}"""
        keyed: Dict[CoefficientKey, Scalar] = {}
        for blocks, value in terms.items():
            key = CoefficientKey.from_dense(blocks)
            keyed[key] = keyed.get(key, 0) + value
        return cls(field, MultiDegree.of(multidegree), tuple(dims), keyed)

    @property
    def m(self) -> int:
        return self.multidegree.m

    @property
    def num_terms(self) -> int:
        return len(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_multilinear(self) -> bool:
        return all(n == 1 for n in self.multidegree)

    @property
    def is_single_block(self) -> bool:
        return self.m == 1

    def coefficients(self) -> np.ndarray:
        return np.array(list(self.terms.values()), dtype=self.field.dtype)

    @cached_property
    def _compiled(self) -> Tuple[List[np.ndarray], np.ndarray]:
        """Dense exponent matrices (T x d_i) per block plus the coefficient vector"""
        keys = list(self.terms)
        exps = [
            np.array([key.alphas[i].to_dense(d) for key in keys], dtype=np.int64).reshape(len(keys), d)
            for i, d in enumerate(self.dims)
        ]
        return exps, self.coefficients()

    def fingerprint(self) -> str:
        return hashlib.sha256(to_json(self).encode("utf-8")).hexdigest()

    def __repr__(self):
        return (f"MultiPolynomial({self.field.value}, n={self.multidegree.degrees}, "
                f"dims={self.dims}, terms={self.num_terms})")


@dataclass(frozen=True)
class FiniteTypeSummand:
    """phi^(1)(x_1)^n1 ... phi^(m)(x_m)^nm * b"""
    functionals: Tuple[np.ndarray, ...]
    target: Scalar = 1.0


@dataclass(frozen=True)
class FiniteTypeSpec:
    summands: Tuple[FiniteTypeSummand, ...] = ()

    @classmethod
    def of(cls, *summands: Tuple[Sequence[Vector], Scalar]) -> "FiniteTypeSpec":
        return cls(tuple(
            FiniteTypeSummand(tuple(np.asarray(phi) for phi in functionals), target)
            for functionals, target in summands
        ))


@dataclass
class Violation:
    key: CoefficientKey
    block: int
    reason: str


@dataclass
class ValidationReport:
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


@dataclass
class RecoveryReport:
    samples: int
    unknowns: int
    residual: float
    check_error: float
    tolerance: float


# ══════════════════════════════════════════════════════════════════════════════
# VALIDATION AND EVALUATION
# ══════════════════════════════════════════════════════════════════════════════

def mp_validate(P: MultiPolynomial) -> ValidationReport:
    """Check every key against the multidegree and the block dimensions"""
    report = ValidationReport()
    for key in P.terms:
        for i, (alpha, n, d) in enumerate(zip(key.alphas, P.multidegree, P.dims)):
            if alpha.degree != n:
                report.violations.append(Violation(key, i, f"block {i} degree {alpha.degree} != {n}"))
            if alpha.max_index >= d:
                report.violations.append(
                    Violation(key, i, f"block {i} coordinate {alpha.max_index} out of range for dimension {d}"))
    if not report.ok:
        logger.debug(f"Validation found {len(report.violations)} violation(s) in {P!r}")
    return report


def _as_scalar(value) -> Scalar:
    return value.item() if hasattr(value, "item") else value


def _as_inexact(x: Vector) -> np.ndarray:
    """Integer points are promoted to float64 so powers cannot wrap around"""
    x = np.asarray(x)
    return x.astype(np.result_type(x, np.float64), copy=False)


def eval_monomial(x: Vector, alpha: MultiIndex) -> Scalar:
    """x^alpha = prod_j x_j^alpha_j (1 for the empty index)"""
    x = _as_inexact(x)
    if alpha.max_index >= len(x):
        raise MalformedInput(f"monomial coordinate {alpha.max_index} out of range for a vector of length {len(x)}")
    value = 1
    for index, power in alpha.exponents:
        value = value * x[index] ** power
    return _as_scalar(value)


def _check_points(P: MultiPolynomial, xs: Sequence[np.ndarray]) -> None:
    if len(xs) != P.m:
        raise MalformedInput(f"expected {P.m} block vectors, got {len(xs)}")
    for i, (x, d) in enumerate(zip(xs, P.dims)):
        if x.shape[-1] != d:
            raise MalformedInput(f"block {i} has length {x.shape[-1]}, expected {d}")


def evaluate_batch(P: MultiPolynomial, xs: Sequence[Vector]) -> np.ndarray:
    """
    Evaluate P at N points at once

    Args:
        P: polynomial
        xs: m arrays of shape (N, d_i)

    Returns:
        Array of shape (N,)
    """
    xs = [np.atleast_2d(_as_inexact(x)) for x in xs]
    _check_points(P, xs)
    count = xs[0].shape[0]
    exps, coeffs = P._compiled
    dtype = np.result_type(P.field.dtype, *[x.dtype for x in xs])
    if P.is_zero:
        return np.zeros(count, dtype=dtype)
    values = np.ones((count, len(coeffs)), dtype=dtype)
    for x, e in zip(xs, exps):
        values = values * np.prod(x[:, None, :] ** e[None, :, :], axis=2)
    return values @ coeffs.astype(dtype)


def mp_eval(P: MultiPolynomial, xs: Sequence[Vector]) -> Scalar:
    """P(x_1, ..., x_m) = sum_alpha c_alpha prod_i x_i^alpha^(i)"""
    points = [np.asarray(x) for x in xs]
    if len(points) != P.m or any(x.ndim != 1 for x in points):
        raise MalformedInput(f"expected {P.m} one-dimensional block vectors")
    return _as_scalar(evaluate_batch(P, [x[None, :] for x in points])[0])


# ══════════════════════════════════════════════════════════════════════════════
# CONSTRUCTION
# ══════════════════════════════════════════════════════════════════════════════

def all_keys(multidegree, dims: Sequence[int]) -> Iterator[CoefficientKey]:
    """Every admissible key of the shape, in lexicographic order"""
    multidegree = MultiDegree.of(multidegree)
    per_block = [
        sorted(MultiIndex.from_dense(c) for c in _composition_table(n, d))
        for n, d in zip(multidegree, dims)
    ]
    for alphas in itertools.product(*per_block):
        yield CoefficientKey(tuple(alphas))


def finite_type(spec: FiniteTypeSpec, multidegree, dims: Sequence[int],
                field: Optional[Field] = None) -> MultiPolynomial:
    """
    Expand sum_i phi_i^(1)(x_1)^n1 ... phi_i^(m)(x_m)^nm b_i into coefficients

    Args:
        spec: summands with one functional per block and a scalar target
        multidegree: (n_1, ..., n_m)
        dims: block dimensions
        field: scalar field; inferred from the data when omitted
    """
    multidegree = MultiDegree.of(multidegree)
    dims = tuple(dims)
    is_complex = False
    terms: Dict[Tuple[Tuple[int, ...], ...], Scalar] = {}
    for s, summand in enumerate(spec.summands):
        if len(summand.functionals) != multidegree.m:
            raise MalformedInput(f"summand {s} has {len(summand.functionals)} functionals, expected {multidegree.m}")
        expansions = []
        for j, (phi, n, d) in enumerate(zip(summand.functionals, multidegree, dims)):
            phi = np.asarray(phi)
            if phi.shape != (d,):
                raise MalformedInput(f"summand {s} functional {j} has shape {phi.shape}, expected ({d},)")
            is_complex = is_complex or np.iscomplexobj(phi)
            expansions.append(expand_linear_power(phi, n))
        is_complex = is_complex or isinstance(summand.target, complex)
        for combo in itertools.product(*(e.items() for e in expansions)):
            key = tuple(blocks for blocks, _ in combo)
            value = summand.target
            for _, c in combo:
                value = value * c
            terms[key] = terms.get(key, 0) + value
    if field is None:
        field = Field.COMPLEX if is_complex else Field.REAL
    return MultiPolynomial.from_dense_terms(multidegree, dims, terms, field)


def identity_multipolynomial(multidegree) -> MultiPolynomial:
    """(lambda_1, ..., lambda_m) -> lambda_1^n1 ... lambda_m^nm on K x ... x K"""
    multidegree = MultiDegree.of(multidegree)
    key = CoefficientKey(tuple(MultiIndex(((0, n),)) for n in multidegree))
    return MultiPolynomial(Field.REAL, multidegree, (1,) * multidegree.m, {key: 1.0})


def linear_combination(a: Scalar, P: MultiPolynomial, b: Scalar, Q: MultiPolynomial) -> MultiPolynomial:
    """aP + bQ for polynomials of the same shape"""
    if P.multidegree != Q.multidegree or P.dims != Q.dims:
        raise MalformedInput("linear combination needs polynomials of the same shape")
    result_field = Field.COMPLEX if Field.COMPLEX in (P.field, Q.field) or isinstance(a * b, complex) else Field.REAL
    terms: Dict[CoefficientKey, Scalar] = {}
    for key, value in P.terms.items():
        terms[key] = a * value
    for key, value in Q.terms.items():
        terms[key] = terms.get(key, 0) + b * value
    return MultiPolynomial(result_field, P.multidegree, P.dims, terms)


def restrict_block(P: MultiPolynomial, block: int, frozen: Sequence[Optional[Vector]]) -> MultiPolynomial:
    """
    Freeze every block except `block` at the given vectors

    The result is a single-block n_block-homogeneous polynomial on K^d_block.
    """
    if not 0 <= block < P.m:
        raise MalformedInput(f"block {block} out of range for m = {P.m}")
    if len(frozen) != P.m:
        raise MalformedInput(f"expected {P.m} entries in frozen (the restricted block's entry is ignored)")
    is_complex = P.field is Field.COMPLEX
    terms: Dict[CoefficientKey, Scalar] = {}
    for key, value in P.terms.items():
        for j, alpha in enumerate(key.alphas):
            if j != block:
                x = np.asarray(frozen[j])
                if x.shape != (P.dims[j],):
                    raise MalformedInput(f"frozen block {j} has shape {x.shape}, expected ({P.dims[j]},)")
                is_complex = is_complex or np.iscomplexobj(x)
                value = value * eval_monomial(x, alpha)
        single = CoefficientKey((key.alphas[block],))
        terms[single] = terms.get(single, 0) + value
    field = Field.COMPLEX if is_complex else Field.REAL
    return MultiPolynomial(field, MultiDegree((P.multidegree[block],)), (P.dims[block],), terms)


def random_multipolynomial(
    multidegree,
    dims: Sequence[int],
    rng: np.random.Generator,
    density: float = 1.0,
    field: Field = Field.REAL,
    max_terms: Optional[int] = None,
) -> MultiPolynomial:
    """Gaussian coefficients on a random subset of the admissible keys (never empty)"""
    keys = list(all_keys(multidegree, dims))
    mask = rng.random(len(keys)) < density
    if not mask.any():
        mask[rng.integers(len(keys))] = True
    chosen = [k for k, keep in zip(keys, mask) if keep]
    if max_terms is not None and len(chosen) > max_terms:
        picks = sorted(rng.choice(len(chosen), size=max_terms, replace=False))
        chosen = [chosen[i] for i in picks]
    values = rng.standard_normal(len(chosen))
    if field is Field.COMPLEX:
        values = values + 1j * rng.standard_normal(len(chosen))
    return MultiPolynomial(field, MultiDegree.of(multidegree), tuple(dims), dict(zip(chosen, values.tolist())))


# ══════════════════════════════════════════════════════════════════════════════
# RECOVERY FROM VALUES
# ══════════════════════════════════════════════════════════════════════════════

@lru_cache(maxsize=None)
def _block_system(n: int, d: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Simplex-lattice nodes beta/n for every weak composition beta of n into d parts,
    the homogeneous monomial exponents (same enumeration) and the square matrix
    V[p, q] = node_p ^ exponent_q. Degree-n forms restricted to the simplex are
    polynomials of degree <= n in d - 1 variables, for which the principal
    lattice is unisolvent, so V is invertible.
    """
    comps = np.array(_composition_table(n, d), dtype=np.int64).reshape(-1, d)
    nodes = comps / n
    vander = np.prod(nodes[:, None, :] ** comps[None, :, :], axis=2)
    return nodes, comps, vander


def interpolation_grid(multidegree, dims: Sequence[int]) -> List[np.ndarray]:
    """Per-block interpolation nodes (N_i x d_i), all inside the unit ball"""
    multidegree = MultiDegree.of(multidegree)
    return [_block_system(n, d)[0] for n, d in zip(multidegree, dims)]


def interpolation_constant(multidegree, dims: Sequence[int]) -> float:
    """prod_i sum |V_i^-1|: bounds sum |c_alpha| by this times the largest grid value"""
    multidegree = MultiDegree.of(multidegree)
    constant = 1.0
    for n, d in zip(multidegree, dims):
        constant *= float(np.abs(np.linalg.inv(_block_system(n, d)[2])).sum())
    return constant


def _apply_along(tensor: np.ndarray, matrix: np.ndarray, axis: int) -> np.ndarray:
    moved = np.moveaxis(tensor, axis, 0)
    shape = moved.shape
    result = matrix @ moved.reshape(shape[0], -1)
    return np.moveaxis(result.reshape((matrix.shape[0],) + shape[1:]), 0, axis)


def coeffs_from_values(
    f: Callable[[Sequence[np.ndarray]], Scalar],
    multidegree,
    dims: Sequence[int],
    field: Field = Field.REAL,
    seed: int = 0,
) -> MultiPolynomial:
    """
    Recover the coefficients of a black-box (n_1, ..., n_m)-homogeneous polynomial

    The sample set is the tensor product of per-block simplex lattices, so the
    linear system is the Kronecker product of small square blocks and is solved
    one axis at a time. The recovered polynomial is then compared with f at a
    few random points; a mismatch means f was not of the declared shape.

    Raises:
        RecoveryFailure: residual or cross-check above INTERPOLATION_RESIDUAL_TOL
    """
    from config import INTERPOLATION_CHECK_POINTS, INTERPOLATION_CHOP, INTERPOLATION_RESIDUAL_TOL

    multidegree = MultiDegree.of(multidegree)
    dims = tuple(dims)
    field = Field.parse(field)
    systems = [_block_system(n, d) for n, d in zip(multidegree, dims)]
    sizes = [len(s[0]) for s in systems]

    samples = np.zeros(sizes, dtype=np.complex128)
    for idx in itertools.product(*(range(k) for k in sizes)):
        samples[idx] = f([systems[i][0][j] for i, j in enumerate(idx)])

    coeffs = samples
    for axis, (_, _, vander) in enumerate(systems):
        moved = np.moveaxis(coeffs, axis, 0)
        shape = moved.shape
        solved, *_ = np.linalg.lstsq(vander, moved.reshape(shape[0], -1), rcond=None)
        coeffs = np.moveaxis(solved.reshape(shape), 0, axis)

    rebuilt = coeffs
    for axis, (_, _, vander) in enumerate(systems):
        rebuilt = _apply_along(rebuilt, vander, axis)
    scale = 1.0 + float(np.abs(samples).max(initial=0.0))
    residual = float(np.abs(rebuilt - samples).max(initial=0.0)) / scale

    threshold = INTERPOLATION_CHOP * max(1.0, float(np.abs(coeffs).max(initial=0.0)))
    terms: Dict[Tuple[Tuple[int, ...], ...], Scalar] = {}
    for idx in itertools.product(*(range(k) for k in sizes)):
        value = complex(coeffs[idx])
        if abs(value) <= threshold:
            continue
        if field is Field.REAL:
            value = value.real
        terms[tuple(tuple(int(e) for e in systems[i][1][j]) for i, j in enumerate(idx))] = value
    recovered = MultiPolynomial.from_dense_terms(multidegree, dims, terms, field)

    rng = np.random.default_rng(seed)
    check_error = 0.0
    for _ in range(INTERPOLATION_CHECK_POINTS):
        xs = [rng.uniform(-1.0, 1.0, d) for d in dims]
        if field is Field.COMPLEX:
            xs = [x + 1j * rng.uniform(-1.0, 1.0, len(x)) for x in xs]
        expected = complex(f(xs))
        got = complex(mp_eval(recovered, xs))
        check_error = max(check_error, abs(expected - got) / (1.0 + abs(expected)))
    if field is Field.REAL and np.abs(coeffs.imag).max(initial=0.0) > INTERPOLATION_RESIDUAL_TOL * scale:
        check_error = max(check_error, float(np.abs(coeffs.imag).max()))

    report = RecoveryReport(
        samples=int(np.prod(sizes)),
        unknowns=int(np.prod(sizes)),
        residual=residual,
        check_error=check_error,
        tolerance=INTERPOLATION_RESIDUAL_TOL,
    )
    if residual > INTERPOLATION_RESIDUAL_TOL or check_error > INTERPOLATION_RESIDUAL_TOL:
        logger.warning(f"Coefficient recovery failed: residual={residual:.3g}, check={check_error:.3g}")
        raise RecoveryFailure("values are not those of a polynomial of the declared shape", report)
    logger.debug(f"Recovered {recovered.num_terms} terms from {report.samples} samples")
    return recovered


# ══════════════════════════════════════════════════════════════════════════════
# JSON
# ══════════════════════════════════════════════════════════════════════════════

def to_dict(P: MultiPolynomial) -> Dict[str, Any]:
    terms = []
    for key, value in P.terms.items():
        value = complex(value)
        terms.append({
            "alphas": [[{"i": i, "e": e} for i, e in alpha.exponents] for alpha in key.alphas],
            "re": value.real,
            "im": value.imag,
        })
    return {
        "field": P.field.value,
        "multidegree": list(P.multidegree.degrees),
        "dims": list(P.dims),
        "terms": terms,
    }


def _require(data: Mapping[str, Any], name: str, kind) -> Any:
    if name not in data:
        raise MalformedInput(f"missing field '{name}'")
    if not isinstance(data[name], kind):
        raise MalformedInput(f"field '{name}' has the wrong type")
    return data[name]


def from_dict(data: Mapping[str, Any]) -> MultiPolynomial:
    if not isinstance(data, Mapping):
        raise MalformedInput("polynomial must be a JSON object")
    field = Field.parse(_require(data, "field", str))
    multidegree = MultiDegree.of(_require(data, "multidegree", list))
    dims = _require(data, "dims", list)
    terms: Dict[CoefficientKey, Scalar] = {}
    for t, term in enumerate(_require(data, "terms", list)):
        try:
            key = CoefficientKey(tuple(
                MultiIndex(tuple((int(entry["i"]), int(entry["e"])) for entry in alpha))
                for alpha in term["alphas"]
            ))
            value = complex(float(term["re"]), float(term.get("im", 0.0)))
        except (KeyError, TypeError, ValueError) as e:
            raise MalformedInput(f"terms[{t}]: {e}")
        if key in terms:
            raise MalformedInput(f"terms[{t}]: duplicate key")
        terms[key] = value
    return MultiPolynomial(field, multidegree, tuple(dims), terms)


def to_json(P: MultiPolynomial) -> str:
    return json.dumps(to_dict(P), separators=(",", ":"))


def from_json(text: str) -> MultiPolynomial:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedInput(f"invalid JSON: {e}")
    return from_dict(data)

