"""
MULTIPOLY Norms
Certified sup-norm brackets over products of sup-norm unit balls, coefficient
and weak sequence norms, and numerical checks of the continuity estimates
"""

import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import qmc

from .engine import Engine, get_engine
from .errors import BudgetExceeded, MalformedInput, UnsupportedField
from .mpcore import (
    Field,
    MultiPolynomial,
    Vector,
    evaluate_batch,
    interpolation_constant,
    interpolation_grid,
    mp_eval,
)

logger = logging.getLogger(__name__)


class NormMethod(Enum):
    """How a bracket was obtained"""
    VERTEX_EXACT = "vertex_exact"    # sign-vertex enumeration; lower == upper
    BLOCK_ASCENT = "block_ascent"    # multi-start ascent, coefficient-sum upper
    SPECTRAL = "spectral"            # residual spectral bounds over a partial vertex search
    COEFF_SUM = "coeff_sum"          # no search; upper is sum |c|


@dataclass
class NormEstimate:
    """lower is attained at witness; upper is a proven bound"""
    lower: float
    witness: List[np.ndarray]
    upper: float
    method: NormMethod

    def __post_init__(self):
        if self.lower > self.upper:
            if self.lower - self.upper > 1e-9 * max(1.0, self.upper):
                raise ValueError(f"norm bracket inverted: lower={self.lower} > upper={self.upper}")
            self.upper = self.lower

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def to_dict(self) -> Dict[str, Any]:
        witness = []
        for w in self.witness:
            if np.iscomplexobj(w):
                witness.append([[float(v.real), float(v.imag)] for v in w])
            else:
                witness.append([float(v) for v in w])
        return {
            "lower": float(self.lower),
            "upper": float(self.upper),
            "method": self.method.value,
            "witness": witness,
        }


@dataclass
class WeakNormInput:
    """A finite family (x_j) in one sup-norm block space and the exponent q"""
    family: List[np.ndarray]
    q: float


@dataclass
class ContinuityReport:
    samples: int
    violations: int
    coarse_violations: int
    max_ratio: float
    witness_ratio: float
    lower: float
    upper: float

    @property
    def passed(self) -> bool:
        return (self.violations == 0 and self.coarse_violations == 0
                and self.witness_ratio >= self.lower * (1 - 1e-6))


@dataclass
class BallTransferReport:
    probes: int
    shifted_max: float
    centered_max: float
    factor: float
    slack: float

    @property
    def bound(self) -> float:
        return self.shifted_max * self.factor * (1 + self.slack)

    @property
    def passed(self) -> bool:
        return self.centered_max <= self.bound


@dataclass
class UniformBoundReport:
    family_size: int
    grid_sup: float
    constant: float
    max_upper: float

    @property
    def bound(self) -> float:
        return self.grid_sup * self.constant

    @property
    def passed(self) -> bool:
        return self.max_upper <= self.bound * (1 + 1e-9) + 1e-12


# ══════════════════════════════════════════════════════════════════════════════
# COEFFICIENT NORMS
# ══════════════════════════════════════════════════════════════════════════════

def coefficient_sum(P: MultiPolynomial) -> float:
    """sum |c_alpha|: every monomial is bounded by 1 on the unit ball"""
    return float(np.abs(P.coefficients()).sum())


def lp_coeff_norm(P: MultiPolynomial, p: float) -> float:
    """(sum |c_alpha|^p)^(1/p)"""
    if not p > 0:
        raise MalformedInput(f"p must be > 0, got {p}")
    # summed in sorted order: equal multisets give bit-identical norms
    magnitudes = np.sort(np.abs(P.coefficients()))
    if magnitudes.size == 0:
        return 0.0
    return float(np.sum(magnitudes ** p) ** (1.0 / p))


def weak_lq_norm(data: WeakNormInput) -> float:
    """
    sup over the dual unit ball of (sum_j |phi(x_j)|^q)^(1/q)

    For sup-norm spaces the dual ball is the l1 ball whose extreme points are
    +-e_k, so the supremum is the largest column q-norm.
    """
    if not data.q > 0:
        raise MalformedInput(f"q must be > 0, got {data.q}")
    if not data.family:
        return 0.0
    lengths = {len(x) for x in data.family}
    if len(lengths) != 1:
        raise MalformedInput(f"family vectors have different lengths {sorted(lengths)}")
    columns = np.abs(np.array([np.asarray(x) for x in data.family]))
    return float(np.max(np.sum(columns ** data.q, axis=0) ** (1.0 / data.q)))


# ══════════════════════════════════════════════════════════════════════════════
# MULTILINEAR ORACLES
# ══════════════════════════════════════════════════════════════════════════════

def dense_tensor(P: MultiPolynomial) -> np.ndarray:
    """Coefficient tensor of shape dims for an all-ones multidegree"""
    if not P.is_multilinear:
        raise MalformedInput(f"dense tensor needs multidegree (1, ..., 1), got {P.multidegree.degrees}")
    tensor = np.zeros(P.dims, dtype=P.field.dtype)
    for key, value in P.terms.items():
        tensor[tuple(alpha.exponents[0][0] for alpha in key.alphas)] = value
    return tensor


def spectral_upper_bound(P: MultiPolynomial) -> float:
    """
    prod_i sqrt(d_i) * min over modes of the largest singular value of the unfolding

    |T(x_1, ..., x_m)| <= sigma * prod ||x_i||_2 and ||x_i||_2 <= sqrt(d_i) on the sup ball.
    """
    tensor = dense_tensor(P)
    sigma = min(
        np.linalg.norm(np.moveaxis(tensor, i, 0).reshape(P.dims[i], -1), 2)
        for i in range(P.m)
    )
    return float(sigma * math.prod(math.sqrt(d) for d in P.dims))


def _require_real_multilinear(P: MultiPolynomial, what: str):
    if not P.is_multilinear:
        raise MalformedInput(f"{what} needs multidegree (1, ..., 1), got {P.multidegree.degrees}")
    if P.field is Field.COMPLEX:
        raise UnsupportedField("vertex enumeration is exact only over the reals; use block ascent")


def _sign_rows(codes: np.ndarray, bits: int, fix_first: bool = True) -> np.ndarray:
    """Sign vectors of length bits encoded by codes; with fix_first the first entry is +1"""
    free_bits = bits - 1 if fix_first else bits
    shifts = np.arange(free_bits, dtype=np.int64)
    free = 1.0 - 2.0 * ((codes[:, None] >> shifts[None, :]) & 1)
    if not fix_first:
        return free
    return np.hstack([np.ones((len(codes), 1)), free])


def _code_chunks(count: int) -> Iterator[np.ndarray]:
    from config import VERTEX_CHUNK
    for start in range(0, count, VERTEX_CHUNK):
        yield np.arange(start, min(start + VERTEX_CHUNK, count), dtype=np.int64)


def sup_norm_multilinear_exact(P: MultiPolynomial, budget: Optional[int] = None) -> NormEstimate:
    """
    Exact sup norm of a real multilinear form

    Enumerates the sign vertices of every block except the largest one (the
    first sign is fixed, since flipping a whole block only flips the sign of
    the value) and solves the last block in closed form: for a linear
    functional g the maximum of |g(y)| over the sup ball is sum |g_k|, at
    y = sign(g).

    Raises:
        MalformedInput: multidegree is not all ones
        UnsupportedField: complex coefficients
        BudgetExceeded: prod 2^d_i over the enumerated blocks above the budget
    """
    from config import VERTEX_BUDGET

    _require_real_multilinear(P, "exact oracle")
    budget = VERTEX_BUDGET if budget is None else budget

    last = int(np.argmax(P.dims))
    others = [i for i in range(P.m) if i != last]
    bits = sum(P.dims[i] for i in others)
    required = 2 ** bits
    if required > budget:
        raise BudgetExceeded("vertex enumeration", required, budget)

    tensor = np.transpose(dense_tensor(P), others + [last])
    sizes = [P.dims[i] for i in others]
    if not others:
        g = tensor
        best_signs: List[np.ndarray] = []
    else:
        best_value, best_code, g = -1.0, 0, None
        for codes in _code_chunks(2 ** (bits - 1)):
            values = _contract_vertices(tensor, _sign_rows(codes, bits), sizes)
            totals = np.abs(values).sum(axis=1)
            idx = int(np.argmax(totals))
            if totals[idx] > best_value:
                best_value, best_code = float(totals[idx]), int(codes[idx])
                g = values[idx]
        flat = _sign_rows(np.array([best_code], dtype=np.int64), bits)[0]
        best_signs = np.split(flat, np.cumsum(sizes)[:-1])

    last_signs = np.where(g >= 0, 1.0, -1.0)
    witness: List[Optional[np.ndarray]] = [None] * P.m
    for i, s in zip(others, best_signs):
        witness[i] = np.asarray(s, dtype=float)
    witness[last] = last_signs
    value = abs(mp_eval(P, witness))
    logger.debug(f"Vertex oracle: {required} vertices, norm={value:.12g}")
    return NormEstimate(value, witness, value, NormMethod.VERTEX_EXACT)


def _contract_vertices(tensor: np.ndarray, signs: np.ndarray, sizes: Sequence[int]) -> np.ndarray:
    """Contract every enumerated block of tensor with its slice of each sign row"""
    blocks = np.split(signs, np.cumsum(sizes)[:-1], axis=1)
    values = np.einsum("ca,a...->c...", blocks[0], tensor)
    for block in blocks[1:]:
        values = np.einsum("cb,cb...->c...", block, values)
    return values


# ══════════════════════════════════════════════════════════════════════════════
# BUDGETED VERTEX SEARCH
# ══════════════════════════════════════════════════════════════════════════════

def _residual_bound(values: np.ndarray) -> np.ndarray:
    """
    Per row: min of the coefficient sum and the unfolding spectral bound of
    the residual form values[c] on the free blocks
    """
    count, dims = values.shape[0], values.shape[1:]
    bound = np.abs(values).reshape(count, -1).sum(axis=1)
    if len(dims) < 2:
        return bound
    scale = math.prod(math.sqrt(d) for d in dims)
    modes = range(1) if len(dims) == 2 else range(len(dims))
    sigma = np.minimum.reduce([
        np.linalg.norm(np.moveaxis(values, k + 1, 1).reshape(count, dims[k], -1), 2, axis=(1, 2))
        for k in modes
    ])
    return np.minimum(bound, sigma * scale)


def _matrix_vertex_max(B: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
    """max of x^T B y over sign vectors, enumerating x with its first sign fixed"""
    bits = B.shape[0]
    best, best_x = -1.0, None
    for codes in _code_chunks(2 ** (bits - 1)):
        rows = _sign_rows(codes, bits)
        totals = np.abs(rows @ B).sum(axis=1)
        idx = int(np.argmax(totals))
        if totals[idx] > best:
            best, best_x = float(totals[idx]), rows[idx]
    return best, best_x, np.where(best_x @ B >= 0, 1.0, -1.0)


@dataclass
class _VertexSearch:
    """Bounds of every enumerated vertex and an exact solver for one of them"""
    bounds: np.ndarray
    cost: int
    solve: Optional[Callable[[int], Tuple[float, List[np.ndarray]]]]


def _block_search(tensor: np.ndarray, dims: Sequence[int], budget: int) -> Optional[_VertexSearch]:
    """Enumerate whole blocks, smallest first, leaving at least two blocks free"""
    order = sorted(range(len(dims)), key=lambda i: (dims[i], i))
    enumerated: List[int] = []
    bits = 0
    for i in order[:-2]:
        if 2 ** (bits + dims[i] - 1) > budget:
            break
        enumerated.append(i)
        bits += dims[i]
    if not enumerated:
        return None
    free = [i for i in range(len(dims)) if i not in enumerated]
    moved = np.transpose(tensor, enumerated + free)
    sizes = [dims[i] for i in enumerated]
    bounds = np.concatenate([
        _residual_bound(_contract_vertices(moved, _sign_rows(codes, bits), sizes))
        for codes in _code_chunks(2 ** (bits - 1))
    ])
    if len(free) != 2:
        return _VertexSearch(bounds, 0, None)

    free_dims = [dims[i] for i in free]
    small = int(np.argmin(free_dims))

    def solve(code: int) -> Tuple[float, List[np.ndarray]]:
        signs = _sign_rows(np.array([code], dtype=np.int64), bits)
        B = _contract_vertices(moved, signs, sizes)[0]
        value, x, y = _matrix_vertex_max(B if small == 0 else B.T)
        witness: List[Optional[np.ndarray]] = [None] * len(dims)
        for i, s in zip(enumerated, np.split(signs[0], np.cumsum(sizes)[:-1])):
            witness[i] = s
        witness[free[small]], witness[free[1 - small]] = x, y
        return value, witness

    return _VertexSearch(bounds, 2 ** (free_dims[small] - 1), solve)


def _split_search(tensor: np.ndarray, budget: int) -> Optional[_VertexSearch]:
    """
    Two blocks: enumerate the head of the smaller block

    With head signs fixed the form is g + C^T t in the free tail t, and over
    sign vectors t
        ||g + C^T t||_1 <= ||g||_1 + ||C||_{inf->1}
        ||g + C^T t||_1 <= sqrt(d) (||g||^2 + 2 ||C g||_1 + |t|^2 sigma(C)^2)^(1/2)
    """
    small = int(np.argmin(tensor.shape))
    B = tensor if small == 0 else tensor.T
    rows, cols = B.shape
    if rows < 2:
        return None
    head = min(rows - 1, max(1, int(math.log2(max(budget, 1))) - 1))
    tail = rows - head
    H, C = B[:head], B[head:]
    sigma = float(np.linalg.norm(C, 2))
    tail_norm = min(float(np.abs(C).sum()), math.sqrt(tail * cols) * sigma)
    bounds = []
    for codes in _code_chunks(2 ** (head - 1)):
        G = _sign_rows(codes, head) @ H
        l1 = np.abs(G).sum(axis=1) + tail_norm
        quad = (G ** 2).sum(axis=1) + 2.0 * np.abs(G @ C.T).sum(axis=1) + tail * sigma ** 2
        bounds.append(np.minimum(l1, np.sqrt(cols * quad)))
    tails = np.vstack([_sign_rows(codes, tail, fix_first=False) for codes in _code_chunks(2 ** tail)]) \
        if 2 ** tail <= budget else None

    def solve(code: int) -> Tuple[float, List[np.ndarray]]:
        signs = _sign_rows(np.array([code], dtype=np.int64), head)[0]
        totals = np.abs(signs @ H + tails @ C).sum(axis=1)
        idx = int(np.argmax(totals))
        x = np.concatenate([signs, tails[idx]])
        y = np.where(x @ B >= 0, 1.0, -1.0)
        return float(totals[idx]), [x, y] if small == 0 else [y, x]

    return _VertexSearch(np.concatenate(bounds), 2 ** tail, solve if tails is not None else None)


def sup_norm_vertex_search(P: MultiPolynomial, budget: Optional[int] = None) -> NormEstimate:
    """
    Certified bracket of a real multilinear form within a vertex budget

    Within the budget this is the exact oracle. Beyond it, sign vertices are
    enumerated for as much of the form as the budget allows and every vertex
    gets a closed-form bound on its residual form; the maximum of these
    bounds is a proven upper bound. Leftover budget solves the vertices with
    the highest bounds exactly, best first, until no remaining bound beats
    the best value found; at that point the bracket is closed.
    """
    from config import VERTEX_BUDGET

    _require_real_multilinear(P, "vertex search")
    budget = VERTEX_BUDGET if budget is None else budget
    try:
        return sup_norm_multilinear_exact(P, budget)
    except BudgetExceeded as e:
        logger.debug(f"Vertex search instead of full enumeration: {e}")

    tensor = dense_tensor(P)
    search = _split_search(tensor, budget) if P.m == 2 else _block_search(tensor, P.dims, budget)
    witness = [np.ones(d) for d in P.dims]
    if search is None:
        return NormEstimate(abs(mp_eval(P, witness)), witness, spectral_upper_bound(P), NormMethod.SPECTRAL)

    bounds = search.bounds
    spent, best_value, solved = len(bounds), -1.0, 0
    if search.solve is not None:
        for code in np.argsort(-bounds, kind="stable"):
            if bounds[code] <= best_value or spent + search.cost > budget:
                break
            value, candidate = search.solve(int(code))
            bounds[code] = value
            spent += search.cost
            solved += 1
            if value > best_value:
                best_value, witness = value, candidate
    upper = float(bounds.max())
    lower = abs(mp_eval(P, witness))
    logger.debug(f"Vertex search: {len(bounds)} vertices bounded, {solved} solved, "
                 f"bracket [{lower:.12g}, {upper:.12g}]")
    if best_value >= upper:
        return NormEstimate(lower, witness, lower, NormMethod.VERTEX_EXACT)
    return NormEstimate(lower, witness, max(upper, lower), NormMethod.SPECTRAL)


# ══════════════════════════════════════════════════════════════════════════════
# BLOCK ASCENT
# ══════════════════════════════════════════════════════════════════════════════

class _Ascent:
    """Cyclic exact maximization of |P| one coordinate (or one linear block) at a time"""

    def __init__(self, P: MultiPolynomial, tol: float, sweep_limit: int):
        from config import COMPLEX_PHASE_SAMPLES, UNIVARIATE_TOL
        self.P = P
        self.tol = tol
        self.sweep_limit = sweep_limit
        self.complex = P.field is Field.COMPLEX
        self.exps, coeffs = P._compiled
        self.coeffs = coeffs.astype(np.complex128 if self.complex else np.float64)
        self.phases = COMPLEX_PHASE_SAMPLES
        self.xtol = UNIVARIATE_TOL
        # single coordinate carrying each term in a linear block
        self.linear_index = [
            np.argmax(e, axis=1) if n == 1 else None
            for e, n in zip(self.exps, P.multidegree)
        ]

    def _block_values(self, xs: List[np.ndarray]) -> List[np.ndarray]:
        return [np.prod(x[None, :] ** e, axis=1) for x, e in zip(xs, self.exps)]

    def run(self, rng: np.random.Generator) -> Tuple[float, List[np.ndarray]]:
        if self.complex:
            xs = [np.exp(2j * np.pi * rng.random(d)) for d in self.P.dims]
        else:
            xs = [rng.uniform(-1.0, 1.0, d) for d in self.P.dims]
        blocks = self._block_values(xs)
        value = abs(np.sum(self.coeffs * np.prod(blocks, axis=0)))
        for sweep in range(self.sweep_limit):
            before = value
            for i, n in enumerate(self.P.multidegree):
                rest = self.coeffs * np.prod([b for j, b in enumerate(blocks) if j != i], axis=0)
                if n == 1:
                    xs[i] = self._linear_block(xs[i], rest, self.linear_index[i])
                else:
                    for k in range(self.P.dims[i]):
                        xs[i][k] = self._coordinate(xs[i], k, rest, self.exps[i], n)
                blocks[i] = np.prod(xs[i][None, :] ** self.exps[i], axis=1)
            value = abs(np.sum(self.coeffs * np.prod(blocks, axis=0)))
            if value - before <= self.tol * max(1.0, value):
                break
        return value, xs

    def _linear_block(self, x: np.ndarray, rest: np.ndarray, index: np.ndarray) -> np.ndarray:
        g = np.zeros(len(x), dtype=rest.dtype)
        np.add.at(g, index, rest)
        if self.complex:
            modulus = np.abs(g)
            return np.where(modulus > 0, np.conj(g) / np.where(modulus > 0, modulus, 1.0), x)
        current = np.sign(np.sum(g * x)) or 1.0
        return np.where(g > 0, current, np.where(g < 0, -current, x))

    def _coordinate(self, x: np.ndarray, k: int, rest: np.ndarray, e: np.ndarray, n: int):
        frozen = x.copy()
        frozen[k] = 1.0
        weights = rest * np.prod(frozen[None, :] ** e, axis=1)
        q = np.zeros(n + 1, dtype=weights.dtype)
        np.add.at(q, e[:, k], weights)
        current = x[k]
        best_t, best = current, abs(np.polynomial.polynomial.polyval(current, q))
        for t in self._candidates(q):
            v = abs(np.polynomial.polynomial.polyval(t, q))
            if v > best:
                best_t, best = t, v
        return best_t

    def _candidates(self, q: np.ndarray) -> List[Any]:
        if not self.complex:
            candidates: List[Any] = [-1.0, 1.0]
            dq = np.polynomial.polynomial.polyder(q)
            if len(dq) > 1 and np.any(dq[1:] != 0):
                for root in np.polynomial.polynomial.polyroots(np.trim_zeros(dq, "b")):
                    if abs(root.imag) < 1e-9 and -1.0 <= root.real <= 1.0:
                        candidates.append(float(root.real))
            return candidates
        # maximum modulus: the best point of the disc lies on the circle
        grid = 2 * np.pi * np.arange(self.phases) / self.phases
        values = np.abs(np.polynomial.polynomial.polyval(np.exp(1j * grid), q))
        theta = grid[int(np.argmax(values))]
        half = np.pi / self.phases
        refined = minimize_scalar(
            lambda t: -abs(np.polynomial.polynomial.polyval(np.exp(1j * t), q)),
            bounds=(theta - half, theta + half),
            method="bounded",
            options={"xatol": self.xtol},
        )
        return [np.exp(1j * theta), np.exp(1j * refined.x)]


def sup_norm_estimate(
    P: MultiPolynomial,
    starts: Optional[int] = None,
    tol: Optional[float] = None,
    seed: Optional[int] = None,
    use_exact: bool = True,
    engine: Optional[Engine] = None,
) -> NormEstimate:
    """
    Bracket ||P|| = sup |P| over the product of sup-norm unit balls

    Args:
        P: validated polynomial
        starts: random starts of the ascent (0 evaluates the all-ones vertex only)
        tol: stagnation tolerance between sweeps
        seed: root seed; start s uses SeedSequence(seed).spawn(starts)[s]
        use_exact: run the vertex oracle (or the budgeted vertex search beyond
            the budget) when P is a real multilinear form

    Returns:
        NormEstimate whose upper is the best certified bound available
    """
    from config import ASCENT_SWEEP_LIMIT, DEFAULT_SEED, DEFAULT_STARTS, STAGNATION_TOL

    starts = DEFAULT_STARTS if starts is None else int(starts)
    tol = STAGNATION_TOL if tol is None else tol
    seed = DEFAULT_SEED if seed is None else seed

    upper = coefficient_sum(P)
    if P.is_zero:
        return NormEstimate(0.0, [np.ones(d) for d in P.dims], 0.0, NormMethod.COEFF_SUM)

    method = NormMethod.BLOCK_ASCENT
    searched: Optional[NormEstimate] = None
    if P.is_multilinear:
        if use_exact and P.field is Field.REAL:
            searched = sup_norm_vertex_search(P)
            if searched.method is NormMethod.VERTEX_EXACT:
                return searched
        spectral = spectral_upper_bound(P) if searched is None else searched.upper
        if spectral < upper:
            upper, method = spectral, NormMethod.SPECTRAL

    if starts <= 0:
        witness = [np.ones(d) for d in P.dims] if searched is None else searched.witness
        return NormEstimate(abs(mp_eval(P, witness)), witness, upper, NormMethod.COEFF_SUM)

    ascent = _Ascent(P, tol, ASCENT_SWEEP_LIMIT)
    children = np.random.SeedSequence(seed).spawn(starts)
    results = (engine or get_engine()).map(lambda ss: ascent.run(np.random.default_rng(ss)), children)

    best_value, best_xs = -1.0, None
    for value, xs in results:
        if value > best_value:
            best_value, best_xs = value, xs
    lower = abs(mp_eval(P, best_xs))
    if searched is not None and searched.lower > lower:
        lower, best_xs = searched.lower, searched.witness
    logger.debug(f"Ascent over {starts} starts: [{lower:.12g}, {upper:.12g}] ({method.value})")
    return NormEstimate(lower, best_xs, max(upper, lower), method)


def sup_norm_components(polys: Sequence[MultiPolynomial], **kwargs) -> NormEstimate:
    """Sup norm of a vector-valued polynomial whose target carries the sup norm"""
    if not polys:
        raise MalformedInput("vector polynomial has no components")
    estimates = [sup_norm_estimate(P, **kwargs) for P in polys]
    best = max(range(len(estimates)), key=lambda i: (estimates[i].lower, -i))
    upper = max(e.upper for e in estimates)
    if all(e.method is NormMethod.VERTEX_EXACT for e in estimates):
        method = NormMethod.VERTEX_EXACT
    else:
        method = max(estimates, key=lambda e: e.upper).method
        if method is NormMethod.VERTEX_EXACT:
            method = NormMethod.BLOCK_ASCENT
    return NormEstimate(estimates[best].lower, estimates[best].witness, upper, method)


# ══════════════════════════════════════════════════════════════════════════════
# CONTINUITY CHECKS
# ══════════════════════════════════════════════════════════════════════════════

def block_norms(xs: Sequence[Vector]) -> List[float]:
    return [float(np.max(np.abs(np.asarray(x)), initial=0.0)) for x in xs]


def continuity_bound(P: MultiPolynomial, xs: Sequence[Vector], norm: float) -> Tuple[float, float]:
    """(|P(xs)|, norm * prod ||x_i||^n_i)"""
    lhs = abs(mp_eval(P, xs))
    rhs = norm * math.prod(r ** n for r, n in zip(block_norms(xs), P.multidegree))
    return lhs, rhs


def _random_points(P: MultiPolynomial, rng: np.random.Generator, count: int) -> List[np.ndarray]:
    points = []
    for d in P.dims:
        x = rng.uniform(-1.0, 1.0, (count, d))
        if P.field is Field.COMPLEX:
            x = x + 1j * rng.uniform(-1.0, 1.0, (count, d))
        points.append(x * 10.0 ** rng.uniform(-2.0, 2.0, (count, 1)))
    return points


def continuity_certificate(
    P: MultiPolynomial,
    samples: Optional[int] = None,
    estimate: Optional[NormEstimate] = None,
    seed: Optional[int] = None,
    tol: Optional[float] = None,
) -> ContinuityReport:
    """
    Check |P(x)| <= ||P|| prod ||x_i||^n_i on points of arbitrary size

    Also checks the coarser single-polynomial estimate |P(x)| <= ||P|| (max ||x_i||)^M
    and that the rescaled witness reaches the lower end of the bracket, so the
    best constant is seen to lie inside [lower, upper].
    """
    from config import CONTINUITY_SAMPLES, CONTINUITY_TOL, DEFAULT_SEED

    samples = CONTINUITY_SAMPLES if samples is None else samples
    seed = DEFAULT_SEED if seed is None else seed
    tol = CONTINUITY_TOL if tol is None else tol
    estimate = estimate or sup_norm_estimate(P, seed=seed)

    rng = np.random.default_rng(seed)
    xs = _random_points(P, rng, samples)
    values = np.abs(evaluate_batch(P, xs))
    norms = [np.max(np.abs(x), axis=1) for x in xs]
    product = np.prod([r ** n for r, n in zip(norms, P.multidegree)], axis=0)
    coarse = np.max(norms, axis=0) ** P.multidegree.total

    violations = int(np.sum(values > estimate.upper * product * (1 + tol)))
    coarse_violations = int(np.sum(values > estimate.upper * coarse * (1 + tol)))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(product > 0, values / product, 0.0)

    scaled = [3.0 * np.asarray(w) for w in estimate.witness]
    lhs, rhs = continuity_bound(P, scaled, 1.0)
    witness_ratio = lhs / rhs if rhs > 0 else 0.0

    report = ContinuityReport(
        samples=samples,
        violations=violations,
        coarse_violations=coarse_violations,
        max_ratio=float(np.max(ratios, initial=0.0)),
        witness_ratio=float(witness_ratio),
        lower=estimate.lower,
        upper=estimate.upper,
    )
    log = logger.info if report.passed else logger.warning
    log(f"Continuity certificate: {violations} violation(s) in {samples} samples, "
        f"max ratio {report.max_ratio:.6g} within [{estimate.lower:.6g}, {estimate.upper:.6g}]")
    return report


def transfer_factor(multidegree) -> float:
    """prod n_i^n_i / n_i!"""
    return math.prod(n ** n / math.factorial(n) for n in multidegree)


def ball_transfer_check(
    P: MultiPolynomial,
    center: Sequence[Vector],
    radius: float,
    probes: Optional[int] = None,
    slack: Optional[float] = None,
    seed: Optional[int] = None,
) -> BallTransferReport:
    """
    A bound C on the ball around `center` gives C prod n_i^n_i/n_i! on the ball around 0

    Both balls are probed with the same Latin-hypercube offsets.
    """
    from config import BALL_TRANSFER_PROBES, BALL_TRANSFER_SLACK, DEFAULT_SEED

    if not radius > 0:
        raise MalformedInput(f"radius must be > 0, got {radius}")
    probes = BALL_TRANSFER_PROBES if probes is None else probes
    slack = BALL_TRANSFER_SLACK if slack is None else slack
    seed = DEFAULT_SEED if seed is None else seed
    center = [np.asarray(a) for a in center]
    if len(center) != P.m or any(a.shape != (d,) for a, d in zip(center, P.dims)):
        raise MalformedInput("center does not match the polynomial's block dimensions")

    total = sum(P.dims)
    is_complex = P.field is Field.COMPLEX or any(np.iscomplexobj(a) for a in center)
    sampler = qmc.LatinHypercube(d=2 * total if is_complex else total, seed=seed)
    u = sampler.random(probes)
    if is_complex:
        offsets = radius * np.sqrt(u[:, :total]) * np.exp(2j * np.pi * u[:, total:])
    else:
        offsets = radius * (2.0 * u - 1.0)
    parts = np.split(offsets, np.cumsum(P.dims)[:-1], axis=1)

    shifted = np.abs(evaluate_batch(P, [a[None, :] + x for a, x in zip(center, parts)]))
    centered = np.abs(evaluate_batch(P, parts))
    report = BallTransferReport(
        probes=probes,
        shifted_max=float(shifted.max()),
        centered_max=float(centered.max()),
        factor=transfer_factor(P.multidegree),
        slack=slack,
    )
    logger.info(f"Ball transfer: centered {report.centered_max:.6g} <= {report.bound:.6g} "
                f"(factor {report.factor:.6g}): {report.passed}")
    return report


def uniform_bound_report(family: Sequence[MultiPolynomial]) -> UniformBoundReport:
    """
    Pointwise bounded on the interpolation grid implies uniformly bounded

    grid_sup is the largest |P_i| over the grid; every coefficient sum (hence
    every sup norm) is at most grid_sup times the interpolation constant.
    """
    if not family:
        raise MalformedInput("empty family")
    shape = (family[0].multidegree, family[0].dims)
    if any((P.multidegree, P.dims) != shape for P in family):
        raise MalformedInput("family members must share multidegree and dims")
    nodes = interpolation_grid(*shape)
    index = list(itertools.product(*(range(len(g)) for g in nodes)))
    points = [np.array([g[idx[i]] for idx in index]) for i, g in enumerate(nodes)]
    grid_sup = max(float(np.abs(evaluate_batch(P, points)).max()) for P in family)
    return UniformBoundReport(
        family_size=len(family),
        grid_sup=grid_sup,
        constant=interpolation_constant(*shape),
        max_upper=max(coefficient_sum(P) for P in family),
    )
