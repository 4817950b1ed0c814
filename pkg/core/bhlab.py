"""
MULTIPOLY Bohnenblust-Hille Lab
Critical exponent, variable-splitting embedding, random-sign multilinear forms
and their multipolynomial lift, and ratio-growth scans
"""

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, TextIO, Tuple

import numpy as np

from .engine import Engine, get_engine
from .errors import BudgetExceeded, MalformedInput
from .mpcore import CoefficientKey, Field, MultiDegree, MultiIndex, MultiPolynomial, mp_eval
from .norms import (
    NormEstimate,
    lp_coeff_norm,
    sup_norm_estimate,
    sup_norm_multilinear_exact,
)

logger = logging.getLogger(__name__)


def bh_exponent(n) -> float:
    """2M / (M + 1)"""
    M = MultiDegree.of(n).total
    return 2 * M / (M + 1)


def expected_slope(n, p: float) -> float:
    """Growth rate of log ratio in log r when ||P_r|| ~ r^((M+1)/2)"""
    M = MultiDegree.of(n).total
    return M / p - (M + 1) / 2


# ══════════════════════════════════════════════════════════════════════════════
# SPLIT EMBEDDING
# ══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class BlockPartition:
    """assignment[i][j] is the target coordinate of coordinate j of block i"""
    assignment: Tuple[Tuple[int, ...], ...]
    target_dim: int

    def __post_init__(self):
        assignment = tuple(tuple(int(t) for t in block) for block in self.assignment)
        images = [t for block in assignment for t in block]
        if len(set(images)) != len(images):
            raise MalformedInput("partition images must be disjoint")
        if any(not 0 <= t < self.target_dim for t in images):
            raise MalformedInput(f"partition image out of range for target dimension {self.target_dim}")
        object.__setattr__(self, "assignment", assignment)

    @classmethod
    def contiguous(cls, dims: Sequence[int]) -> "BlockPartition":
        """Block i occupies the next dims[i] target coordinates"""
        blocks, start = [], 0
        for d in dims:
            blocks.append(tuple(range(start, start + d)))
            start += d
        return cls(tuple(blocks), start)

    def matches(self, dims: Sequence[int]) -> bool:
        return len(self.assignment) == len(dims) and all(len(b) == d for b, d in zip(self.assignment, dims))


@dataclass
class SplitEmbedReport:
    p_values: List[float]
    lp_source: List[float]
    lp_embedded: List[float]
    source: NormEstimate
    embedded: NormEstimate

    @property
    def lp_preserved(self) -> bool:
        return self.lp_source == self.lp_embedded

    @property
    def dominated(self) -> bool:
        """lower ||Q|| <= upper ||P||"""
        return self.embedded.lower <= self.source.upper * (1 + 1e-12)

    @property
    def passed(self) -> bool:
        return self.lp_preserved and self.dominated

    def to_dict(self) -> Dict[str, Any]:
        return {
            "p": self.p_values,
            "lp_source": self.lp_source,
            "lp_embedded": self.lp_embedded,
            "source": self.source.to_dict(),
            "embedded": self.embedded.to_dict(),
            "pass": self.passed,
        }


def split_embed(P: MultiPolynomial, partition: Optional[BlockPartition] = None) -> MultiPolynomial:
    """
    Q(z) = P(z restricted to the image of block 1, ..., of block m)

    Q is M-homogeneous on K^target_dim and has the same coefficient multiset as P.
    """
    partition = partition or BlockPartition.contiguous(P.dims)
    if not partition.matches(P.dims):
        raise MalformedInput(f"partition does not match block dimensions {P.dims}")
    terms: Dict[CoefficientKey, Any] = {}
    for key, value in P.terms.items():
        merged = {
            partition.assignment[i][index]: e
            for i, alpha in enumerate(key.alphas)
            for index, e in alpha.exponents
        }
        terms[CoefficientKey((MultiIndex.from_dict(merged),))] = value
    return MultiPolynomial(P.field, MultiDegree((P.multidegree.total,)), (partition.target_dim,), terms)


def split_embed_report(
    P: MultiPolynomial,
    p_values: Optional[Sequence[float]] = None,
    partition: Optional[BlockPartition] = None,
    starts: Optional[int] = None,
    seed: Optional[int] = None,
) -> SplitEmbedReport:
    """Coefficient norms agree for every p and ||Q|| <= ||P||"""
    p_values = list(p_values) if p_values is not None else [1.0, bh_exponent(P.multidegree), 2.0]
    Q = split_embed(P, partition)
    report = SplitEmbedReport(
        p_values=p_values,
        lp_source=[lp_coeff_norm(P, p) for p in p_values],
        lp_embedded=[lp_coeff_norm(Q, p) for p in p_values],
        source=sup_norm_estimate(P, starts=starts, seed=seed),
        embedded=sup_norm_estimate(Q, starts=starts, seed=seed),
    )
    if not report.dominated:
        logger.error(f"Embedded norm {report.embedded.lower:.12g} exceeds source bound {report.source.upper:.12g}")
    return report


# ══════════════════════════════════════════════════════════════════════════════
# RANDOM-SIGN FORMS
# ══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True, eq=False)
class KszInstance:
    """T_r(x^(1), ..., x^(M)) = sum over i in {0..r-1}^M of signs[i] x^(1)_i1 ... x^(M)_iM"""
    r: int
    M: int
    seed: int
    signs: np.ndarray

    def __post_init__(self):
        if self.signs.shape != (self.r,) * self.M or not np.all(np.abs(self.signs) == 1):
            raise MalformedInput(f"signs must be a +-1 array of shape {(self.r,) * self.M}")

    @property
    def size(self) -> int:
        return int(self.signs.size)


def ksz_build(r: int, M: int, seed: int) -> KszInstance:
    """Uniform random signs; deterministic in (r, M, seed)"""
    if r < 1 or M < 1:
        raise MalformedInput(f"need r >= 1 and M >= 1, got r={r}, M={M}")
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(r, M)))
    signs = (2 * rng.integers(0, 2, size=(r,) * M) - 1).astype(np.int8)
    return KszInstance(r, M, seed, signs)


def ksz_as_multilinear(inst: KszInstance) -> MultiPolynomial:
    terms = {
        CoefficientKey(tuple(MultiIndex(((i, 1),)) for i in index)): float(inst.signs[index])
        for index in np.ndindex(*inst.signs.shape)
    }
    return MultiPolynomial(Field.REAL, MultiDegree((1,) * inst.M), (inst.r,) * inst.M, terms)


def _slot_layout(n: MultiDegree) -> List[Tuple[int, int]]:
    """(block, copy) of every slot: the first n_1 slots feed block 1, and so on"""
    return [(i, c) for i, ni in enumerate(n) for c in range(ni)]


def ksz_lift(inst: KszInstance, n) -> MultiPolynomial:
    """
    P_r on K^(n_1 r) x ... x K^(n_m r)

    Block i holds n_i disjoint copies of K^r, ordered copy 0, copy 1, ...;
    slot s of T_r reads copy c of block i, so coordinate t of the slot is
    coordinate c r + t of the block.
    """
    n = MultiDegree.of(n)
    if n.total != inst.M:
        raise MalformedInput(f"multidegree {n.degrees} has total {n.total} but the instance has M = {inst.M}")
    layout = _slot_layout(n)
    terms: Dict[CoefficientKey, Any] = {}
    for index in np.ndindex(*inst.signs.shape):
        blocks: List[List[Tuple[int, int]]] = [[] for _ in n]
        for (i, c), t in zip(layout, index):
            blocks[i].append((c * inst.r + t, 1))
        key = CoefficientKey(tuple(MultiIndex(tuple(sorted(b))) for b in blocks))
        terms[key] = float(inst.signs[index])
    return MultiPolynomial(Field.REAL, n, tuple(ni * inst.r for ni in n), terms)


def lift_witness(slots: Sequence[np.ndarray], n) -> List[np.ndarray]:
    """Concatenate slot vectors into block vectors following the lift layout"""
    n = MultiDegree.of(n)
    blocks: List[List[np.ndarray]] = [[] for _ in n]
    for (i, _), x in zip(_slot_layout(n), slots):
        blocks[i].append(np.asarray(x))
    return [np.concatenate(b) for b in blocks]


def ksz_norm(
    inst: KszInstance,
    n,
    starts: Optional[int] = None,
    engine: Optional[Engine] = None,
) -> NormEstimate:
    """
    Bracket ||P_r|| through ||T_r||

    The copies in each block are disjoint, so the product of block balls is
    the product of slot balls and both norms coincide. T_r is solved exactly
    within the vertex budget; beyond it the bracket is the better of ascent
    and the budgeted vertex search, whose upper end bounds every residual
    form spectrally.
    """
    from config import LARGE_STARTS

    T = ksz_as_multilinear(inst)
    try:
        estimate = sup_norm_multilinear_exact(T)
    except BudgetExceeded:
        starts = LARGE_STARTS if starts is None else starts
        estimate = sup_norm_estimate(T, starts=starts, seed=inst.seed, engine=engine)
    P_r = ksz_lift(inst, n)
    witness = lift_witness(estimate.witness, n)
    return NormEstimate(abs(mp_eval(P_r, witness)), witness, estimate.upper, estimate.method)


# ══════════════════════════════════════════════════════════════════════════════
# RATIO SCAN
# ══════════════════════════════════════════════════════════════════════════════

@dataclass
class ScanRow:
    r: int
    seed: int
    norm_lower: float
    norm_upper: float
    lp_norm: float
    retries: int = 0

    @property
    def ratio_lower(self) -> float:
        return self.lp_norm / self.norm_upper

    @property
    def ratio_upper(self) -> float:
        return self.lp_norm / self.norm_lower


@dataclass
class RatioScanResult:
    n: MultiDegree
    p: float
    rows: List[ScanRow] = field(default_factory=list)
    cells: List[ScanRow] = field(default_factory=list)

    @property
    def M(self) -> int:
        return self.n.total

    @property
    def expected_slope(self) -> float:
        return expected_slope(self.n, self.p)

    def _fit(self, values: Sequence[float]) -> float:
        if len({row.r for row in self.rows}) < 2:
            return math.nan
        x = np.log([row.r for row in self.rows])
        return float(np.polyfit(x, np.log(values), 1)[0])

    @property
    def fitted_slope(self) -> float:
        """Least-squares slope of log ratio_lower against log r"""
        return self._fit([row.ratio_lower for row in self.rows])

    @property
    def fitted_slope_upper(self) -> float:
        return self._fit([row.ratio_upper for row in self.rows])

    @property
    def fitted_K(self) -> float:
        """max upper ||P_r|| / r^((M+1)/2)"""
        if not self.rows:
            return math.nan
        return max(row.norm_upper / row.r ** ((self.M + 1) / 2) for row in self.rows)

    def write_csv(self, stream: TextIO):
        from config import CSV_COLUMNS, CSV_FLOAT_FORMAT

        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        label = ",".join(str(k) for k in self.n)
        for row in self.rows:
            writer.writerow([label, format(self.p, CSV_FLOAT_FORMAT), row.r, row.seed] + [
                format(v, CSV_FLOAT_FORMAT)
                for v in (row.norm_lower, row.norm_upper, row.lp_norm, row.ratio_lower, row.ratio_upper)
            ])

    def to_csv(self) -> str:
        buffer = io.StringIO()
        self.write_csv(buffer)
        return buffer.getvalue()

    def summary(self) -> Dict[str, Any]:
        return {
            "n": list(self.n.degrees),
            "p": self.p,
            "M": self.M,
            "bh_exponent": bh_exponent(self.n),
            "r_values": [row.r for row in self.rows],
            "seeds": [row.seed for row in self.rows],
            "retries": [row.retries for row in self.rows],
            "fitted_slope": self.fitted_slope,
            "fitted_slope_upper": self.fitted_slope_upper,
            "fitted_K": self.fitted_K,
            "expected_slope": self.expected_slope,
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2)


def _scan_cell(n: MultiDegree, p: float, r: int, seed: int, starts: Optional[int]) -> ScanRow:
    inst = ksz_build(r, n.total, seed)
    estimate = ksz_norm(inst, n, starts=starts, engine=Engine(max_workers=1))
    lp = lp_coeff_norm(ksz_lift(inst, n), p)
    logger.debug(f"Scan cell r={r} seed={seed}: norm in [{estimate.lower:.6g}, {estimate.upper:.6g}]")
    return ScanRow(r, seed, estimate.lower, estimate.upper, lp)


def ratio_scan(
    n,
    p: float,
    r_values: Sequence[int],
    seeds_per_r: Optional[int] = None,
    starts: Optional[int] = None,
    seed: Optional[int] = None,
    engine: Optional[Engine] = None,
) -> RatioScanResult:
    """
    Growth of ||coefficients||_p / ||P_r|| along r

    For each r the seeds seed, seed+1, ... are tried and the instance with the
    smallest norm bound is kept. If even that one lies above the running
    K r^((M+1)/2) envelope, further batches of seeds are tried, up to
    KSZ_MAX_RETRIES.

    Args:
        n: multidegree of the lifted polynomials
        p: coefficient exponent
        r_values: strictly ascending slot dimensions
        seeds_per_r: instances per r
        starts: ascent starts when an instance exceeds the vertex budget
        seed: first seed
    """
    from config import DEFAULT_SEED, DEFAULT_SEEDS_PER_R, KSZ_MAX_RETRIES

    n = MultiDegree.of(n)
    if not p > 0:
        raise MalformedInput(f"p must be > 0, got {p}")
    r_values = [int(r) for r in r_values]
    if not r_values or any(r < 1 for r in r_values) or any(a >= b for a, b in zip(r_values, r_values[1:])):
        raise MalformedInput(f"r values must be positive and strictly ascending, got {r_values}")
    seeds_per_r = DEFAULT_SEEDS_PER_R if seeds_per_r is None else int(seeds_per_r)
    if seeds_per_r < 1:
        raise MalformedInput("seeds per r must be >= 1")
    seed = DEFAULT_SEED if seed is None else seed
    engine = engine or get_engine()
    exponent = (n.total + 1) / 2

    result = RatioScanResult(n, p)
    for r in r_values:
        envelope = result.fitted_K * r ** exponent if result.rows else math.inf
        best: Optional[ScanRow] = None
        for attempt in range(KSZ_MAX_RETRIES + 1):
            first = seed + attempt * seeds_per_r
            batch = engine.map(
                lambda s: _scan_cell(n, p, r, s, starts),
                range(first, first + seeds_per_r),
            )
            result.cells.extend(batch)
            for row in batch:
                if best is None or row.norm_upper < best.norm_upper:
                    best = row
            if best.norm_lower <= envelope * (1 + 1e-12):
                break
            if attempt < KSZ_MAX_RETRIES:
                logger.warning(f"r={r}: best norm {best.norm_lower:.6g} above envelope {envelope:.6g}, retrying")
        best.retries = attempt
        result.rows.append(best)
        logger.info(f"r={r}: seed {best.seed}, ratio in [{best.ratio_lower:.6g}, {best.ratio_upper:.6g}]")

    logger.info(f"Scan n={n.degrees} p={p}: slope {result.fitted_slope:.4f} "
                f"(expected {result.expected_slope:.4f}), K={result.fitted_K:.4f}")
    return result
