import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from core.compose import (
    HyperIneqConfig,
    InequalityReport,
    LinearMap,
    SummingMode,
    VectorMultiPolynomial,
    compose_hyper,
    compose_linear,
    hyper_inequality_report,
    hyper_multidegree,
    ideal_inequality_report,
    summing_is_null,
    summing_ratio,
)
from core.errors import BudgetExceeded, MalformedInput
from core.mpcore import coeffs_from_values, mp_eval, random_multipolynomial


def random_map(rng, rows, cols):
    return LinearMap(rng.uniform(-1.0, 1.0, (rows, cols)))


def random_case(seed, max_dim=3, max_degree=2):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 3))
    n = tuple(int(v) for v in rng.integers(1, max_degree + 1, m))
    dims = tuple(int(v) for v in rng.integers(1, max_dim + 1, m))
    P = random_multipolynomial(n, dims, rng, density=0.7, max_terms=12)
    us = [random_map(rng, d, int(rng.integers(1, max_dim + 1))) for d in dims]
    t = random_map(rng, int(rng.integers(1, 3)), 1)
    return P, us, t, rng


def assert_close_coefficients(P, Q, tol):
    for key in set(P.terms) | set(Q.terms):
        assert abs(P.terms.get(key, 0.0) - Q.terms.get(key, 0.0)) <= tol, key


# ══════════════════════════════════════════════════════════════════════════════
# linear maps
# ══════════════════════════════════════════════════════════════════════════════

def test_linear_map_norm_is_largest_row_sum():
    assert LinearMap(np.array([[1.0, -2.0], [0.5, 3.0]])).norm == pytest.approx(3.5)


def test_linear_map_compose_and_apply(rng):
    a, b = random_map(rng, 2, 3), random_map(rng, 3, 4)
    x = rng.normal(size=4)
    assert a.compose(b).apply(x) == pytest.approx(a.apply(b.apply(x)))
    with pytest.raises(MalformedInput):
        b.compose(b)


def test_linear_map_dict_round_trip():
    u = LinearMap(np.array([[1.0, 2j], [0.0, -1.0]]))
    assert LinearMap.from_dict(u.to_dict()) == u
    with pytest.raises(MalformedInput, match="entries"):
        LinearMap.from_dict({"rows": 2, "cols": 2, "entries": [[1.0, 2.0]]})
    with pytest.raises(MalformedInput, match="cols"):
        LinearMap.from_dict({"rows": 1, "entries": [[1.0]]})


def test_vector_polynomial_rejects_mixed_shapes(rng):
    with pytest.raises(MalformedInput):
        VectorMultiPolynomial.of(random_multipolynomial((1,), (2,), rng), random_multipolynomial((2,), (2,), rng))


def test_vector_polynomial_dict_accepts_bare_polynomial(rng):
    from core.mpcore import to_dict
    P = random_multipolynomial((1, 1), (2, 2), rng)
    assert VectorMultiPolynomial.from_dict(to_dict(P)) == VectorMultiPolynomial.of(P)
    V = VectorMultiPolynomial.of(P, P)
    assert VectorMultiPolynomial.from_dict(V.to_dict()) == V


# ══════════════════════════════════════════════════════════════════════════════
# composition with linear maps
# ══════════════════════════════════════════════════════════════════════════════

def test_identities_leave_polynomial_unchanged(rng):
    P = random_multipolynomial((2, 1), (3, 2), rng)
    result = compose_linear(LinearMap.identity(1), P, [LinearMap.identity(3), LinearMap.identity(2)])
    assert result.components == (P,)


def test_scalar_maps_scale_by_homogeneity(rng):
    P = random_multipolynomial((2, 1), (2, 2), rng)
    lambdas = (0.5, -3.0)
    result = compose_linear(LinearMap.identity(1), P, [LinearMap.identity(2).scaled(lam) for lam in lambdas])
    factor = lambdas[0] ** 2 * lambdas[1]
    for key, value in P.terms.items():
        assert result.components[0].terms[key] == pytest.approx(factor * value)


@given(st.integers(0, 10 ** 6))
@settings(max_examples=30, deadline=None)
def test_compose_linear_matches_pointwise(seed):
    P, us, t, rng = random_case(seed)
    composite = compose_linear(t, P, us)
    for _ in range(20):
        ys = [rng.normal(size=u.cols) for u in us]
        expected = t.apply([mp_eval(P, [u.apply(y) for u, y in zip(us, ys)])])
        assert composite.evaluate(ys) == pytest.approx(expected, rel=1e-8, abs=1e-10)


@given(st.integers(0, 10 ** 6))
@settings(max_examples=50, deadline=None)
def test_compose_linear_matches_recovery(seed):
    P, us, _, _ = random_case(seed)
    composite = compose_linear(LinearMap.identity(1), P, us).components[0]
    recovered = coeffs_from_values(
        lambda ys: mp_eval(P, [u.apply(y) for u, y in zip(us, ys)]),
        P.multidegree, [u.cols for u in us],
    )
    assert_close_coefficients(composite, recovered, 1e-7)


@given(st.integers(0, 10 ** 6))
@settings(max_examples=15, deadline=None)
def test_composition_is_functorial(seed):
    P, us, t, rng = random_case(seed)
    us2 = [random_map(rng, u.cols, int(rng.integers(1, 3))) for u in us]
    t2 = random_map(rng, 2, t.rows)
    nested = compose_linear(t2, compose_linear(t, P, us), us2)
    direct = compose_linear(t2.compose(t), P, [u.compose(v) for u, v in zip(us, us2)])
    for a, b in zip(nested.components, direct.components):
        assert_close_coefficients(a, b, 1e-9)


def test_compose_linear_shape_errors(rng):
    P = random_multipolynomial((1, 1), (2, 2), rng)
    with pytest.raises(MalformedInput):
        compose_linear(LinearMap.identity(1), P, [LinearMap.identity(2)])
    with pytest.raises(MalformedInput):
        compose_linear(LinearMap.identity(1), P, [LinearMap.identity(3), LinearMap.identity(2)])
    with pytest.raises(MalformedInput):
        compose_linear(LinearMap.identity(2), P, [LinearMap.identity(2), LinearMap.identity(2)])


def test_compose_linear_term_budget(rng, monkeypatch):
    import config
    P = random_multipolynomial((2, 2), (3, 3), rng)
    monkeypatch.setattr(config, "TERM_BUDGET", 10)
    with pytest.raises(BudgetExceeded):
        compose_linear(LinearMap.identity(1), P, [random_map(rng, 3, 3), random_map(rng, 3, 3)])


# ══════════════════════════════════════════════════════════════════════════════
# ideal inequality
# ══════════════════════════════════════════════════════════════════════════════

def test_ideal_inequality_with_identities(rng):
    P = random_multipolynomial((1, 1), (2, 2), rng)
    report = ideal_inequality_report(LinearMap.identity(1), P, [LinearMap.identity(2)] * 2, seed=3)
    assert report.lhs_lower == pytest.approx(report.rhs)
    assert report.passed


def test_ideal_inequality_with_scalar_maps(rng):
    P = random_multipolynomial((2, 1), (2, 2), rng)
    lam = 0.5
    plain = ideal_inequality_report(LinearMap.identity(1), P, [LinearMap.identity(2)] * 2, seed=3)
    scaled = ideal_inequality_report(LinearMap.identity(1), P, [LinearMap.identity(2).scaled(lam)] * 2, seed=3)
    assert scaled.rhs == pytest.approx(lam ** 3 * plain.rhs)
    assert scaled.lhs_lower == pytest.approx(lam ** 3 * plain.lhs_lower, rel=1e-6)
    assert scaled.passed


@given(st.integers(0, 10 ** 6))
@settings(max_examples=200, deadline=None)
def test_sup_norm_is_an_ideal_norm(seed):
    P, us, t, _ = random_case(seed)
    report = ideal_inequality_report(t, P, us, starts=16, seed=seed + 1)
    assert report.passed, report.to_dict()


def test_inequality_report_dict():
    report = InequalityReport("ideal", 1.0, 1.5, 2.0, 1e-6)
    assert report.to_dict() == {"kind": "ideal", "lhs_lower": 1.0, "lhs_upper": 1.5, "rhs": 2.0, "pass": True}
    assert not InequalityReport("ideal", 3.0, 3.0, 2.0, 1e-6).passed


# ══════════════════════════════════════════════════════════════════════════════
# hyper-ideal composition
# ══════════════════════════════════════════════════════════════════════════════

def test_scalar_monomial_chain(make_poly):
    Q = make_poly((2,), (1,), {(((0, 2),),): 1.0})
    P = make_poly((3,), (1,), {(((0, 3),),): 1.0})
    R = make_poly((2,), (1,), {(((0, 2),),): 1.0})
    result = compose_hyper(R, P, [Q])
    assert result.multidegree.degrees == (12,)
    assert result.components == (make_poly((12,), (1,), {(((0, 12),),): 1.0}),)


def test_hyper_multidegree_formula():
    assert hyper_multidegree([(2,), (1, 3)], (1, 2), 2).degrees == (4, 4, 12)
    with pytest.raises(MalformedInput):
        hyper_multidegree([(2,)], (1, 2), 2)


@given(st.lists(st.lists(st.integers(1, 4), min_size=1, max_size=3), min_size=1, max_size=3), st.integers(1, 4))
@settings(max_examples=100, deadline=None)
def test_hyper_multidegree_products(q_degrees, r):
    k = list(range(1, len(q_degrees) + 1))
    result = hyper_multidegree(q_degrees, k, r).degrees
    expected = [rj * ki * r for qd, ki in zip(q_degrees, k) for rj in qd]
    assert list(result) == expected


def test_degree_one_chain_reduces_to_linear(rng):
    P = random_multipolynomial((1, 1), (2, 2), rng)
    us = [random_map(rng, 2, 3), random_map(rng, 2, 2)]
    R = VectorMultiPolynomial.from_linear_map(LinearMap.identity(1))
    Qs = [VectorMultiPolynomial.from_linear_map(u) for u in us]
    hyper = compose_hyper(R, P, Qs).components[0]
    linear = compose_linear(LinearMap.identity(1), P, us).components[0]
    assert_close_coefficients(hyper, linear, 1e-12)


@given(st.integers(0, 10 ** 6))
@settings(max_examples=20, deadline=None)
def test_compose_hyper_matches_pointwise(seed):
    rng = np.random.default_rng(seed)
    q_shapes = [((int(rng.integers(1, 3)),), (int(rng.integers(1, 3)),)) for _ in range(2)]
    k = tuple(int(v) for v in rng.integers(1, 3, 2))
    Qs = [VectorMultiPolynomial(tuple(random_multipolynomial(n, d, rng, density=0.8) for _ in range(2)))
          for n, d in q_shapes]
    P = VectorMultiPolynomial.of(random_multipolynomial(k, (2, 2), rng, density=0.8, max_terms=4),
                                 random_multipolynomial(k, (2, 2), rng, density=0.8, max_terms=4))
    R = random_multipolynomial((int(rng.integers(1, 3)),), (2,), rng)
    result = compose_hyper(R, P, Qs)
    for _ in range(10):
        zs = [rng.uniform(-1.0, 1.0, d[0]) for _, d in q_shapes]
        inner = [Q.evaluate([z]) for Q, z in zip(Qs, zs)]
        expected = mp_eval(R, [P.evaluate(inner)])
        assert result.evaluate(zs)[0] == pytest.approx(expected, rel=1e-8, abs=1e-10)


def test_compose_hyper_with_multi_block_inner_polynomial(rng):
    Q1 = random_multipolynomial((2,), (2,), rng)
    Q2 = random_multipolynomial((1, 2), (1, 2), rng)
    P = random_multipolynomial((1, 2), (1, 1), rng)
    R = random_multipolynomial((2,), (1,), rng)
    result = compose_hyper(R, P, [Q1, Q2]).components[0]
    assert result.multidegree.degrees == (4, 4, 8)
    assert result.dims == (2, 1, 2)

    def chained(zs):
        return mp_eval(R, [[mp_eval(P, [[mp_eval(Q1, [zs[0]])], [mp_eval(Q2, [zs[1], zs[2]])]])]])

    recovered = coeffs_from_values(chained, (4, 4, 8), (2, 1, 2))
    scale = max(1.0, max(abs(v) for v in result.terms.values()))
    assert_close_coefficients(result, recovered, 1e-7 * scale)
    zs = [rng.uniform(-1.0, 1.0, d) for d in (2, 1, 2)]
    assert mp_eval(result, zs) == pytest.approx(chained(zs), rel=1e-8, abs=1e-10)


@given(st.integers(0, 10 ** 6))
@settings(max_examples=50, deadline=None)
def test_compose_hyper_matches_recovery(seed):
    rng = np.random.default_rng(seed)
    q_shapes = [((int(rng.integers(1, 3)),), (int(rng.integers(1, 3)),)) for _ in range(2)]
    k = tuple(int(v) for v in rng.integers(1, 3, 2))
    Qs = [random_multipolynomial(n, d, rng, density=0.8, max_terms=4) for n, d in q_shapes]
    P = random_multipolynomial(k, (1, 1), rng)
    R = random_multipolynomial((int(rng.integers(1, 3)),), (1,), rng)
    result = compose_hyper(R, P, Qs).components[0]

    def chained(zs):
        inner = [[mp_eval(Q, [z])] for Q, z in zip(Qs, zs)]
        return mp_eval(R, [[mp_eval(P, inner)]])

    recovered = coeffs_from_values(chained, result.multidegree, result.dims)
    scale = max([1.0] + [abs(v) for v in result.terms.values()])
    assert_close_coefficients(result, recovered, 1e-7 * scale)


def test_compose_hyper_shape_errors(make_poly, rng):
    P = random_multipolynomial((1,), (2,), rng)
    Q = random_multipolynomial((1,), (3,), rng)
    R = random_multipolynomial((2,), (1,), rng)
    with pytest.raises(MalformedInput):
        compose_hyper(R, P, [Q])
    two_block = random_multipolynomial((1, 1), (1, 1), rng)
    with pytest.raises(MalformedInput):
        compose_hyper(two_block, P, [VectorMultiPolynomial.of(Q, Q)])


def test_compose_hyper_term_budget(rng, monkeypatch):
    import config
    Q = random_multipolynomial((3,), (3,), rng)
    P = random_multipolynomial((3,), (1,), rng)
    R = random_multipolynomial((3,), (1,), rng)
    monkeypatch.setattr(config, "TERM_BUDGET", 1000)
    with pytest.raises(BudgetExceeded):
        compose_hyper(R, P, [Q])


# ══════════════════════════════════════════════════════════════════════════════
# hyper-ideal inequality
# ══════════════════════════════════════════════════════════════════════════════

def test_hyper_inequality_scalar_chain(make_poly):
    Q = make_poly((2,), (1,), {(((0, 2),),): 1.0})
    P = make_poly((3,), (1,), {(((0, 3),),): 1.0})
    R = make_poly((2,), (1,), {(((0, 2),),): 1.0})
    report = hyper_inequality_report(R, P, [Q], seed=2)
    assert report.lhs_lower == pytest.approx(1.0)
    assert report.rhs == pytest.approx(1.0)
    assert report.passed


def test_hyper_inequality_identity_chain(rng):
    P = random_multipolynomial((1, 1), (2, 2), rng)
    R = VectorMultiPolynomial.from_linear_map(LinearMap.identity(1))
    Qs = [VectorMultiPolynomial.from_linear_map(LinearMap.identity(2))] * 2
    report = hyper_inequality_report(R, P, Qs, seed=2)
    assert report.lhs_lower == pytest.approx(report.rhs, rel=1e-9)
    assert report.passed


def test_hyper_inequality_constants_scale_rhs(make_poly):
    Q = make_poly((2,), (1,), {(((0, 2),),): 1.0})
    P = make_poly((3,), (1,), {(((0, 3),),): 1.0})
    R = make_poly((2,), (1,), {(((0, 2),),): 1.0})
    config = HyperIneqConfig(C_seq=(1.0, 2.0), K_seq=(1.0, 3.0))
    report = hyper_inequality_report(R, P, [Q], config, seed=2)
    # K_2 * (C_2)^(r k) with r = 2, k = 3
    assert report.rhs == pytest.approx(3.0 * 2.0 ** 6)


def test_hyper_config_validation():
    with pytest.raises(MalformedInput):
        HyperIneqConfig(C_seq=(2.0,))
    with pytest.raises(MalformedInput):
        HyperIneqConfig(K_seq=(1.0, 0.5))
    with pytest.raises(MalformedInput):
        HyperIneqConfig(C_seq=())
    config = HyperIneqConfig(C_seq=(1.0, 1.5))
    assert config.C(1) == 1.0
    assert config.C(7) == 1.5
    assert config.K(3) == 1.0


# ══════════════════════════════════════════════════════════════════════════════
# summing
# ══════════════════════════════════════════════════════════════════════════════

def test_summing_single_point(rng):
    P = random_multipolynomial((1, 2), (2, 2), rng)
    x, y = rng.normal(size=2), rng.normal(size=2)
    report = summing_ratio(P, [[x], [y]], 1.0, [1.0, 1.0])
    assert report.lhs == pytest.approx(abs(mp_eval(P, [x, y])))
    assert report.rhs_product == pytest.approx(np.abs(x).max() * np.abs(y).max() ** 2)


def test_summing_ratio_grows_in_null_regime(make_poly):
    P = make_poly((1, 1), (2, 2), {(((0, 1),), ((0, 1),)): 1.0})
    e1 = np.array([1.0, 0.0])
    p, qs = 0.25, [1.0, 1.0]
    assert summing_is_null(P.multidegree, p, qs)
    ratios = [summing_ratio(P, [[e1] * N, [e1] * N], p, qs).ratio for N in (1, 4, 16)]
    # lhs = N^(1/p) and rhs = N^2
    assert ratios == pytest.approx([N ** (1 / p - 2) for N in (1, 4, 16)])
    assert ratios == sorted(ratios)


def test_summing_zero_polynomial(rng):
    from core.mpcore import MultiPolynomial
    P = MultiPolynomial.zero((1,), (2,))
    assert summing_ratio(P, [[rng.normal(size=2)] * 3], 1.0, [2.0]).ratio == 0.0


def test_summing_full_mode_counts_every_tuple(make_poly):
    P = make_poly((1, 1), (1, 1), {(((0, 1),), ((0, 1),)): 1.0})
    xs = [np.array([1.0]), np.array([2.0])]
    ys = [np.array([3.0])]
    report = summing_ratio(P, [xs, ys], 1.0, [1.0, 1.0], mode="full")
    assert report.mode is SummingMode.FULL
    assert report.lhs == pytest.approx(3.0 + 6.0)
    assert report.rhs_product == pytest.approx(3.0 * 3.0)


def test_summing_errors(make_poly):
    P = make_poly((1, 1), (1, 1), {(((0, 1),), ((0, 1),)): 1.0})
    one = [np.array([1.0])]
    with pytest.raises(MalformedInput):
        summing_ratio(P, [one, one * 2], 1.0, [1.0, 1.0])
    with pytest.raises(MalformedInput):
        summing_ratio(P, [one, one], 0.0, [1.0, 1.0])
    with pytest.raises(MalformedInput):
        summing_ratio(P, [one], 1.0, [1.0])


def test_summing_is_null_threshold():
    assert not summing_is_null((1, 1), 1.0, [2.0, 2.0])
    assert summing_is_null((1, 1), 0.4, [2.0, 2.0])
