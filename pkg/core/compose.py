"""
MULTIPOLY Composition
Coefficient-level composition with linear maps (ideal property) and with
multipolynomials (hyper-ideal property), and the inequality and summing checks
"""

import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

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
    expand_linear_power,
    from_dict as poly_from_dict,
    to_dict as poly_to_dict,
)
from .norms import WeakNormInput, sup_norm_components, weak_lq_norm

logger = logging.getLogger(__name__)

Flat = Dict[Tuple[int, ...], Scalar]


# ══════════════════════════════════════════════════════════════════════════════
# TYPES
# ══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True, eq=False)
class LinearMap:
    """Dense matrix between sup-norm spaces K^cols -> K^rows"""
    entries: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.entries)
        if matrix.ndim != 2 or 0 in matrix.shape:
            raise MalformedInput(f"linear map needs a non-empty matrix, got shape {matrix.shape}")
        if not np.issubdtype(matrix.dtype, np.number):
            raise MalformedInput("linear map entries must be numbers")
        matrix = matrix.astype(np.complex128 if np.iscomplexobj(matrix) else np.float64)
        matrix.setflags(write=False)
        object.__setattr__(self, "entries", matrix)

    @classmethod
    def identity(cls, n: int) -> "LinearMap":
        return cls(np.eye(n))

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.entries)

    @property
    def norm(self) -> float:
        """sup -> sup operator norm: largest row l1 sum"""
        return float(np.abs(self.entries).sum(axis=1).max())

    def scaled(self, c: Scalar) -> "LinearMap":
        return LinearMap(c * self.entries)

    def compose(self, other: "LinearMap") -> "LinearMap":
        """self o other"""
        if self.cols != other.rows:
            raise MalformedInput(f"cannot compose {self.rows}x{self.cols} with {other.rows}x{other.cols}")
        return LinearMap(self.entries @ other.entries)

    def apply(self, x: Vector) -> np.ndarray:
        return self.entries @ np.asarray(x)

    def __eq__(self, other):
        return isinstance(other, LinearMap) and np.array_equal(self.entries, other.entries)

    def to_dict(self) -> Dict[str, Any]:
        data = {"rows": self.rows, "cols": self.cols, "entries": self.entries.real.tolist()}
        if self.is_complex:
            data["entries_im"] = self.entries.imag.tolist()
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "LinearMap":
        if not isinstance(data, Mapping):
            raise MalformedInput("linear map must be a JSON object")
        for name in ("rows", "cols", "entries"):
            if name not in data:
                raise MalformedInput(f"missing field '{name}'")
        try:
            matrix = np.array(data["entries"], dtype=float)
            if "entries_im" in data:
                matrix = matrix + 1j * np.array(data["entries_im"], dtype=float)
        except (TypeError, ValueError) as e:
            raise MalformedInput(f"field 'entries': {e}")
        if matrix.shape != (int(data["rows"]), int(data["cols"])):
            raise MalformedInput(f"field 'entries' has shape {matrix.shape}, "
                                 f"expected ({data['rows']}, {data['cols']})")
        return cls(matrix)


@dataclass(frozen=True)
class VectorMultiPolynomial:
    """K^k-valued multipolynomial, one scalar component per output coordinate"""
    components: Tuple[MultiPolynomial, ...]

    def __post_init__(self):
        components = tuple(self.components)
        if not components:
            raise MalformedInput("vector polynomial needs at least one component")
        head = components[0]
        for c in components[1:]:
            if (c.multidegree, c.dims) != (head.multidegree, head.dims):
                raise MalformedInput("vector polynomial components must share multidegree and dims")
        if len({c.field for c in components}) > 1:
            components = tuple(MultiPolynomial(Field.COMPLEX, c.multidegree, c.dims, c.terms) for c in components)
        object.__setattr__(self, "components", components)

    @classmethod
    def of(cls, *components: MultiPolynomial) -> "VectorMultiPolynomial":
        return cls(tuple(components))

    @classmethod
    def wrap(cls, P: Union[MultiPolynomial, "VectorMultiPolynomial"]) -> "VectorMultiPolynomial":
        return P if isinstance(P, VectorMultiPolynomial) else cls((P,))

    @classmethod
    def from_linear_map(cls, u: LinearMap) -> "VectorMultiPolynomial":
        """y -> u y as a (1)-homogeneous vector polynomial"""
        field = Field.COMPLEX if u.is_complex else Field.REAL
        rows = []
        for k in range(u.rows):
            terms = {CoefficientKey((MultiIndex(((l, 1),)),)): u.entries[k, l].item() for l in range(u.cols)}
            rows.append(MultiPolynomial(field, MultiDegree((1,)), (u.cols,), terms))
        return cls(tuple(rows))

    @property
    def field(self) -> Field:
        return self.components[0].field

    @property
    def multidegree(self) -> MultiDegree:
        return self.components[0].multidegree

    @property
    def dims(self) -> Tuple[int, ...]:
        return self.components[0].dims

    @property
    def outputs(self) -> int:
        return len(self.components)

    def evaluate(self, xs: Sequence[Vector]) -> np.ndarray:
        points = [np.asarray(x)[None, :] for x in xs]
        return np.array([evaluate_batch(c, points)[0] for c in self.components])

    def to_dict(self) -> Dict[str, Any]:
        return {"components": [poly_to_dict(c) for c in self.components]}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "VectorMultiPolynomial":
        """Accepts {"components": [...]} or a bare polynomial object"""
        if isinstance(data, Mapping) and "components" in data:
            if not isinstance(data["components"], list):
                raise MalformedInput("field 'components' has the wrong type")
            return cls(tuple(poly_from_dict(c) for c in data["components"]))
        return cls((poly_from_dict(data),))



@dataclass(frozen=True)
class HyperIneqConfig:
    """Constant sequences (C_j), (K_j), 1-based; indices past the end reuse the last value"""
    C_seq: Tuple[float, ...] = (1.0,)
    K_seq: Tuple[float, ...] = (1.0,)
    tol: Optional[float] = None

    def __post_init__(self):
        for name in ("C_seq", "K_seq"):
            seq = tuple(float(v) for v in getattr(self, name))
            if not seq or seq[0] != 1.0 or any(v < 1.0 for v in seq):
                raise MalformedInput(f"{name} must start with 1 and have every entry >= 1")
            object.__setattr__(self, name, seq)

    def C(self, j: int) -> float:
        return self.C_seq[min(j, len(self.C_seq)) - 1]

    def K(self, j: int) -> float:
        return self.K_seq[min(j, len(self.K_seq)) - 1]


@dataclass
class InequalityReport:
    """lhs is a bracket of the composite's norm; only its lower end can falsify"""
    kind: str
    lhs_lower: float
    lhs_upper: float
    rhs: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.lhs_lower <= self.rhs * (1 + self.tol)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "lhs_lower": self.lhs_lower,
            "lhs_upper": self.lhs_upper,
            "rhs": self.rhs,
            "pass": self.passed,
        }


class SummingMode(Enum):
    ABS = "abs"     # diagonal sum over j
    FULL = "full"   # every m-tuple (j_1, ..., j_m)


@dataclass
class SummingReport:
    mode: SummingMode
    lhs: float
    rhs_product: float

    @property
    def ratio(self) -> float:
        if self.rhs_product > 0:
            return self.lhs / self.rhs_product
        return math.inf if self.lhs > 0 else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {"mode": self.mode.value, "lhs": self.lhs, "rhs_product": self.rhs_product, "ratio": self.ratio}


# ══════════════════════════════════════════════════════════════════════════════
# SPARSE EXPANSION
# ══════════════════════════════════════════════════════════════════════════════

class _TermBudget:
    """Counts products of monomials formed during one composition"""

    def __init__(self, budget: int):
        self.budget = budget
        self.used = 0

    def spend(self, count: int):
        self.used += count
        if self.used > self.budget:
            raise BudgetExceeded("composition intermediate monomials", self.used, self.budget)


def _mul(a: Flat, b: Flat, budget: _TermBudget) -> Flat:
    budget.spend(len(a) * len(b))
    product: Flat = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            key = tuple(x + y for x, y in zip(ea, eb))
            product[key] = product.get(key, 0) + ca * cb
    return product


def _add_into(target: Flat, source: Flat, scale: Scalar):
    for key, value in source.items():
        target[key] = target.get(key, 0) + scale * value


def _power(base: Flat, exponent: int, size: int, budget: _TermBudget, cache: Dict[int, Flat]) -> Flat:
    if exponent in cache:
        return cache[exponent]
    result = {(0,) * size: 1} if exponent == 0 else _mul(_power(base, exponent - 1, size, budget, cache), base, budget)
    cache[exponent] = result
    return result


def _split(flat: Tuple[int, ...], sizes: Sequence[int]) -> Tuple[Tuple[int, ...], ...]:
    blocks, start = [], 0
    for s in sizes:
        blocks.append(flat[start:start + s])
        start += s
    return tuple(blocks)


def _require_terms_valid(P: VectorMultiPolynomial, what: str):
    for c in P.components:
        for key in c.terms:
            for alpha, n, d in zip(key.alphas, c.multidegree, c.dims):
                if alpha.degree != n or alpha.max_index >= d:
                    raise MalformedInput(f"{what} has a term that does not match its shape")


# ══════════════════════════════════════════════════════════════════════════════
# IDEAL PROPERTY
# ══════════════════════════════════════════════════════════════════════════════

def compose_linear(t: LinearMap, P: Union[MultiPolynomial, VectorMultiPolynomial],
                   us: Sequence[LinearMap]) -> VectorMultiPolynomial:
    """
    t o P o (u_1, ..., u_m)

    Each block variable x_j is replaced by u_j y_j; every power of a row
    form is expanded by the multinomial theorem with exact integer counts.

    Raises:
        MalformedInput: shapes do not chain
        BudgetExceeded: more than TERM_BUDGET intermediate monomials
    """
    from config import TERM_BUDGET

    P = VectorMultiPolynomial.wrap(P)
    _require_terms_valid(P, "P")
    if len(us) != P.multidegree.m:
        raise MalformedInput(f"need {P.multidegree.m} inner maps, got {len(us)}")
    for j, (u, d) in enumerate(zip(us, P.dims)):
        if u.rows != d:
            raise MalformedInput(f"u_{j + 1} maps into K^{u.rows} but block {j + 1} has dimension {d}")
    if t.cols != P.outputs:
        raise MalformedInput(f"t acts on K^{t.cols} but P has {P.outputs} output(s)")

    budget = _TermBudget(TERM_BUDGET)
    sizes = [u.cols for u in us]
    # cached expansions of (row_k(u_j) . y)^e per block
    powers: List[Dict[Tuple[int, int], Flat]] = [{} for _ in us]

    def block_expansion(j: int, alpha: MultiIndex) -> Flat:
        result: Flat = {(0,) * sizes[j]: 1}
        for k, e in alpha.exponents:
            if (k, e) not in powers[j]:
                powers[j][(k, e)] = expand_linear_power(us[j].entries[k], e)
            result = _mul(result, powers[j][(k, e)], budget)
        return result

    expanded: List[Dict[Tuple[Tuple[int, ...], ...], Scalar]] = []
    for component in P.components:
        terms: Dict[Tuple[Tuple[int, ...], ...], Scalar] = {}
        for key, value in component.terms.items():
            parts = [block_expansion(j, alpha) for j, alpha in enumerate(key.alphas)]
            budget.spend(math.prod(len(p) for p in parts))
            for combo in itertools.product(*(p.items() for p in parts)):
                coeff = value
                for _, c in combo:
                    coeff = coeff * c
                blocks = tuple(e for e, _ in combo)
                terms[blocks] = terms.get(blocks, 0) + coeff
        expanded.append(terms)

    is_complex = P.field is Field.COMPLEX or t.is_complex or any(u.is_complex for u in us)
    field = Field.COMPLEX if is_complex else Field.REAL
    components = []
    for i in range(t.rows):
        combined: Dict[Tuple[Tuple[int, ...], ...], Scalar] = {}
        for c, terms in enumerate(expanded):
            weight = t.entries[i, c].item()
            if weight != 0:
                _add_into(combined, terms, weight)
        components.append(MultiPolynomial.from_dense_terms(P.multidegree, sizes, combined, field))
    logger.debug(f"Linear composition used {budget.used} intermediate monomials")
    return VectorMultiPolynomial(tuple(components))


def ideal_inequality_report(
    t: LinearMap,
    P: Union[MultiPolynomial, VectorMultiPolynomial],
    us: Sequence[LinearMap],
    tol: Optional[float] = None,
    starts: Optional[int] = None,
    seed: Optional[int] = None,
) -> InequalityReport:
    """||t o P o (u_j)|| <= ||t|| ||P|| prod ||u_j||^n_j"""
    from config import DEFAULT_TOL

    tol = DEFAULT_TOL if tol is None else tol
    P = VectorMultiPolynomial.wrap(P)
    composite = compose_linear(t, P, us)
    lhs = sup_norm_components(composite.components, starts=starts, seed=seed)
    norm_p = sup_norm_components(P.components, starts=starts, seed=seed)
    rhs = t.norm * norm_p.upper * math.prod(u.norm ** n for u, n in zip(us, P.multidegree))
    report = InequalityReport("ideal", lhs.lower, lhs.upper, rhs, tol)
    log = logger.info if report.passed else logger.error
    log(f"Ideal inequality: {lhs.lower:.6g} <= {rhs:.6g}: {report.passed}")
    return report


# ══════════════════════════════════════════════════════════════════════════════
# HYPER-IDEAL PROPERTY
# ══════════════════════════════════════════════════════════════════════════════

def hyper_multidegree(q_degrees: Sequence[Sequence[int]], k: Sequence[int], r: int) -> MultiDegree:
    """
    Multidegree of R o P o (Q_1, ..., Q_n)

    Args:
        q_degrees: multidegree of each Q_i
        k: multidegree of P
        r: degree of R

    Returns:
        (r_j k_i r) over the blocks j of every Q_i, in order
    """
    if len(q_degrees) != len(k):
        raise MalformedInput(f"P has {len(k)} blocks but {len(q_degrees)} inner polynomials were given")
    return MultiDegree(tuple(rj * ki * r for qd, ki in zip(q_degrees, k) for rj in qd))


def compose_hyper(
    R: Union[MultiPolynomial, VectorMultiPolynomial],
    P: Union[MultiPolynomial, VectorMultiPolynomial],
    Qs: Sequence[Union[MultiPolynomial, VectorMultiPolynomial]],
) -> VectorMultiPolynomial:
    """
    R o P o (Q_1, ..., Q_n)

    The input blocks of the result are the blocks of Q_1, then those of Q_2,
    and so on. Polynomials are expanded over flat exponent tuples spanning
    every input coordinate and split back into blocks at the end.

    Raises:
        MalformedInput: shapes do not chain or R has more than one block
        BudgetExceeded: more than TERM_BUDGET intermediate monomials
    """
    from config import TERM_BUDGET

    R, P = VectorMultiPolynomial.wrap(R), VectorMultiPolynomial.wrap(P)
    Qs = [VectorMultiPolynomial.wrap(Q) for Q in Qs]
    for name, poly in [("R", R), ("P", P)] + [(f"Q_{i + 1}", Q) for i, Q in enumerate(Qs)]:
        _require_terms_valid(poly, name)
    if R.multidegree.m != 1:
        raise MalformedInput(f"R must be a single-block polynomial, got {R.multidegree.m} blocks")
    if R.dims[0] != P.outputs:
        raise MalformedInput(f"R acts on K^{R.dims[0]} but P has {P.outputs} output(s)")
    if len(Qs) != P.multidegree.m:
        raise MalformedInput(f"P has {P.multidegree.m} blocks but {len(Qs)} inner polynomials were given")
    for i, (Q, d) in enumerate(zip(Qs, P.dims)):
        if Q.outputs != d:
            raise MalformedInput(f"Q_{i + 1} has {Q.outputs} output(s) but block {i + 1} of P has dimension {d}")

    budget = _TermBudget(TERM_BUDGET)
    sizes = [d for Q in Qs for d in Q.dims]
    total = sum(sizes)
    offsets = np.cumsum([0] + [len(Q.dims) for Q in Qs])

    def flatten(poly: MultiPolynomial, first_block: int) -> Flat:
        start = sum(sizes[:first_block])
        flat: Flat = {}
        for key, value in poly.terms.items():
            dense = [0] * total
            position = start
            for alpha, d in zip(key.alphas, poly.dims):
                for idx, e in alpha.exponents:
                    dense[position + idx] = e
                position += d
            flat[tuple(dense)] = value
        return flat

    inner = [[flatten(c, offsets[i]) for c in Q.components] for i, Q in enumerate(Qs)]
    inner_powers: Dict[Tuple[int, int], Dict[int, Flat]] = {}
    middle: List[Flat] = []
    for component in P.components:
        acc: Flat = {}
        for key, value in component.terms.items():
            product: Flat = {(0,) * total: value}
            for i, alpha in enumerate(key.alphas):
                for c, e in alpha.exponents:
                    cache = inner_powers.setdefault((i, c), {})
                    product = _mul(product, _power(inner[i][c], e, total, budget, cache), budget)
            _add_into(acc, product, 1)
        middle.append(acc)

    middle_powers: Dict[int, Dict[int, Flat]] = {}
    multidegree = hyper_multidegree([Q.multidegree.degrees for Q in Qs], P.multidegree.degrees,
                                    R.multidegree[0])
    is_complex = any(x.field is Field.COMPLEX for x in [R, P, *Qs])
    field = Field.COMPLEX if is_complex else Field.REAL
    components = []
    for component in R.components:
        acc = {}
        for key, value in component.terms.items():
            product = {(0,) * total: value}
            for s, e in key.alphas[0].exponents:
                cache = middle_powers.setdefault(s, {})
                product = _mul(product, _power(middle[s], e, total, budget, cache), budget)
            _add_into(acc, product, 1)
        terms = {_split(flat, sizes): value for flat, value in acc.items()}
        components.append(MultiPolynomial.from_dense_terms(multidegree, sizes, terms, field))
    logger.debug(f"Hyper composition used {budget.used} intermediate monomials, output n={multidegree.degrees}")
    return VectorMultiPolynomial(tuple(components))


def hyper_inequality_report(
    R: Union[MultiPolynomial, VectorMultiPolynomial],
    P: Union[MultiPolynomial, VectorMultiPolynomial],
    Qs: Sequence[Union[MultiPolynomial, VectorMultiPolynomial]],
    config: Optional[HyperIneqConfig] = None,
    starts: Optional[int] = None,
    seed: Optional[int] = None,
) -> InequalityReport:
    """
    ||R o P o (Q_i)|| <= K_r prod_i (prod_j C_{r_j})^{r k_i} ||R|| ||P||^r prod_i ||Q_i||^{r k_i}

    A failure under the configured constants is logged as a finding.
    """
    from config import DEFAULT_TOL

    config = config or HyperIneqConfig()
    tol = DEFAULT_TOL if config.tol is None else config.tol
    R, P = VectorMultiPolynomial.wrap(R), VectorMultiPolynomial.wrap(P)
    Qs = [VectorMultiPolynomial.wrap(Q) for Q in Qs]
    composite = compose_hyper(R, P, Qs)

    def upper(poly: VectorMultiPolynomial) -> float:
        return sup_norm_components(poly.components, starts=starts, seed=seed).upper

    lhs = sup_norm_components(composite.components, starts=starts, seed=seed)
    r = R.multidegree[0]
    rhs = config.K(r) * upper(R) * upper(P) ** r
    for Q, k in zip(Qs, P.multidegree):
        constant = math.prod(config.C(rj) for rj in Q.multidegree)
        rhs *= (constant * upper(Q)) ** (r * k)
    report = InequalityReport("hyper", lhs.lower, lhs.upper, rhs, tol)
    if report.passed:
        logger.info(f"Hyper-ideal inequality: {lhs.lower:.6g} <= {rhs:.6g}")
    else:
        logger.warning(f"Hyper-ideal inequality finding: {lhs.lower:.6g} > {rhs:.6g} "
                       f"with C={config.C_seq}, K={config.K_seq}")
    return report


# ══════════════════════════════════════════════════════════════════════════════
# SUMMING
# ══════════════════════════════════════════════════════════════════════════════

def summing_is_null(multidegree, p: float, qs: Sequence[float]) -> bool:
    """1/p > sum n_k/q_k: only the zero polynomial is summing for these exponents"""
    multidegree = MultiDegree.of(multidegree)
    if len(qs) != multidegree.m:
        raise MalformedInput(f"need {multidegree.m} exponents q_k, got {len(qs)}")
    return 1.0 / p > sum(n / q for n, q in zip(multidegree, qs))


def summing_ratio(
    P: Union[MultiPolynomial, VectorMultiPolynomial],
    families: Sequence[Sequence[Vector]],
    p: float,
    qs: Sequence[float],
    mode: Union[str, SummingMode] = SummingMode.ABS,
) -> SummingReport:
    """
    Ratio of the summed values to the product of weak norms

    Args:
        P: polynomial; vector outputs carry the sup norm
        families: one family (x_j) per block
        p: exponent of the outer sum
        qs: weak exponent per block
        mode: abs sums over the diagonal j; full sums over every m-tuple of indices

    Returns:
        SummingReport with lhs, rhs_product = prod ||(x_j^(k))||_{w,q_k}^n_k and their ratio
    """
    from config import TERM_BUDGET

    P = VectorMultiPolynomial.wrap(P)
    mode = SummingMode(mode) if not isinstance(mode, SummingMode) else mode
    m = P.multidegree.m
    if not p > 0 or any(not q > 0 for q in qs):
        raise MalformedInput("p and every q_k must be > 0")
    if len(families) != m or len(qs) != m:
        raise MalformedInput(f"need {m} families and {m} exponents q_k")
    arrays = []
    for k, (family, d) in enumerate(zip(families, P.dims)):
        array = np.array([np.asarray(x) for x in family]).reshape(len(family), -1) if family else np.zeros((0, d))
        if array.shape[1] != d:
            raise MalformedInput(f"family {k + 1} vectors must have length {d}")
        arrays.append(array)

    if mode is SummingMode.ABS:
        lengths = {len(a) for a in arrays}
        if len(lengths) != 1:
            raise MalformedInput(f"abs mode needs families of equal length, got {sorted(len(a) for a in arrays)}")
        points = arrays
    else:
        count = math.prod(len(a) for a in arrays)
        if count > TERM_BUDGET:
            raise BudgetExceeded("full summing evaluations", count, TERM_BUDGET)
        index = list(itertools.product(*(range(len(a)) for a in arrays)))
        points = [a[[idx[k] for idx in index]] if index else a[:0] for k, a in enumerate(arrays)]

    if len(points[0]) == 0:
        lhs = 0.0
    else:
        values = np.max([np.abs(evaluate_batch(c, points)) for c in P.components], axis=0)
        lhs = float(np.sum(values ** p) ** (1.0 / p))
    rhs = math.prod(
        weak_lq_norm(WeakNormInput(list(a), q)) ** n
        for a, q, n in zip(arrays, qs, P.multidegree)
    )
    report = SummingReport(mode, lhs, float(rhs))
    logger.debug(f"Summing ratio ({mode.value}, p={p}, q={tuple(qs)}): {report.ratio:.6g}")
    return report
