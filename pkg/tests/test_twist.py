import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pesto import toy
from pesto.algebra import GF, all_vectors, make_rng, random_affine_bijection
from pesto.errors import BudgetExceeded, ParamRange
from pesto.mpoly import Poly, PolySystem, monomial_basis
from pesto.twist import (CentralMap, build_twisted, ccz_check_via_twist, graph_of, mt_matrix,
                         twist_by_substitution, twisted_system)

F5 = GF(5)


def random_shape(data, n_max=5):
    n = data.draw(st.integers(2, n_max))
    m = data.draw(st.integers(1, n))
    t = data.draw(st.integers(1, m))
    s = data.draw(st.integers(0, n - t))
    return n, m, t, s


# ---------------------------------------------------------------- fixed instance
def test_toy_g_coefficient_exact():
    G = twisted_system(toy.central_map())
    expected = toy.expected_g()
    assert G.m == 4
    for i, e in enumerate(expected):
        assert G[i] == e, f"coordinate {i + 1}"
    assert sum(len(e) for e in expected) == 100


def test_toy_routes_agree():
    cm = toy.central_map()
    assert twist_by_substitution(cm) == twisted_system(cm) == build_twisted(cm)


def test_zero_payload_gives_central_map():
    rng = make_rng(1)
    cm = CentralMap.random(F5, 5, 4, 2, 1, rng)
    zero = CentralMap(F5, 5, 4, 2, 1, PolySystem.zeros(F5, 3, 2, 2), cm.U)
    assert twisted_system(zero) == zero.system()


def test_toy_ov_shape_rejected():
    U = PolySystem.from_polys([Poly(F5, 3, {(0, 1, 1): 1})], F5, 3, 2)
    q = PolySystem.zeros(F5, 2, 1, 2)
    with pytest.raises(ParamRange):
        CentralMap(F5, 3, 2, 1, 0, q, U)


# ---------------------------------------------------------------- twist matrix
def test_mt_identity_and_swap():
    assert np.array_equal(mt_matrix(0, 3, 2).matrix, np.eye(5, dtype=np.int64))
    assert mt_matrix(1, 1, 1).matrix.tolist() == [[0, 1], [1, 0]]
    M = mt_matrix(2, 5, 4).matrix
    assert np.array_equal(M @ M, np.eye(9, dtype=np.int64))
    with pytest.raises(ParamRange):
        mt_matrix(3, 2, 4)


def test_mt_apply_is_matrix_product():
    tm = mt_matrix(2, 4, 3)
    pts = make_rng(0).integers(0, 5, (10, 7))
    assert np.array_equal(tm.apply(pts), pts @ tm.matrix.T)


# ---------------------------------------------------------------- graphs
def test_graph_examples():
    const = PolySystem.from_polys([Poly.const(F5, 1, 3)], F5, 1, 1)
    g = graph_of(const, F5)
    assert len(g) == 5 and all(v[1] == 3 for v in g)
    F3 = GF(3)
    ident = PolySystem.identity(F3, 2)
    g = graph_of(ident)
    assert len(g) == 9 and all(v[:2] == v[2:] for v in g)
    G = twisted_system(toy.central_map())
    assert len(graph_of(G)) == 3125


def test_graph_budget():
    sys = PolySystem.identity(GF(64), 4)
    with pytest.raises(BudgetExceeded):
        graph_of(sys, budget=1000)


def test_ccz_check_true_and_trivial():
    cm = toy.central_map()
    assert ccz_check_via_twist(cm.system(), twisted_system(cm), 2)
    F = cm.system()
    assert ccz_check_via_twist(F, F, 0)


def test_ccz_check_rejects_non_bijective_t():
    # T(x, y) = x^2 is not a bijection of GF(5) for fixed y.
    x = Poly.var(F5, 2, 0)
    y = Poly.var(F5, 2, 1)
    Fsys = PolySystem.from_polys([x * x, x + y], F5, 2, 2)
    res = ccz_check_via_twist(Fsys, Fsys, 1)
    assert not res
    assert "not a graph" in res.diagnostic


def test_ccz_check_wrong_partner():
    cm = toy.central_map()
    G = twisted_system(cm)
    H = G.add_constants([0, 0, 1, 0])
    res = ccz_check_via_twist(cm.system(), H, 2)
    assert not res and "differs" in res.diagnostic


@settings(max_examples=20, deadline=None)
@given(st.data())
def test_twist_is_graph_exhaustive(data):
    n, m, t, s = random_shape(data)
    cm = CentralMap.random(F5, n, m, t, s, make_rng(data.draw(st.integers(0, 2**32 - 1))))
    assert ccz_check_via_twist(cm.system(), twisted_system(cm), t)


# ---------------------------------------------------------------- structure of G
@pytest.mark.parametrize("F", [GF(5), GF(7), GF(64)], ids=str)
def test_g_monomial_structure(F):
    rng = make_rng(3)
    for _ in range(100):
        cm = CentralMap.random(F, 6, 4, 2, 1, rng)
        G = twisted_system(cm)
        assert G.degree() <= 4
        exps, degs = G.basis.exps, G.basis.degrees
        used = np.any(G.coeffs != 0, axis=0)
        xdeg = exps[:, :2].sum(axis=1)
        assert not np.any(used & (degs == 4) & (xdeg > 0))
        assert not np.any(used & (degs == 3) & (xdeg > 1))


def test_g_low_degree_components():
    rng = make_rng(8)
    cm = CentralMap.random(F5, 5, 4, 2, 1, rng)
    G = twisted_system(cm)
    low = 0
    for lam in all_vectors(F5, 2)[1:]:
        full = np.concatenate([lam, [0, 0]])
        assert G.component(full).degree() <= 2
        low += 1
    assert low == 5**2 - 1


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([GF(5), GF(7), GF(64), GF(256)]), st.data())
def test_fast_route_matches_substitution(F, data):
    n, m, t, s = random_shape(data, 5)
    rng = make_rng(data.draw(st.integers(0, 2**32 - 1)))
    cm = CentralMap.random(F, n, m, t, s, rng)
    assert twisted_system(cm) == twist_by_substitution(cm)
    A2 = random_affine_bijection(n, F, rng)
    assert twisted_system(cm, A2) == twisted_system(cm).compose_affine(A2, "input")


def test_central_map_blocks_roundtrip():
    rng = make_rng(5)
    cm = CentralMap.random(GF(64), 8, 6, 3, 2, rng)
    again = CentralMap.from_blocks(cm.field, 8, 6, 3, 2, cm.qmap.coeffs, cm.vinegar_coeffs(), cm.oil_coeffs())
    assert again.U == cm.U and again.qmap == cm.qmap


def test_oil_system_matches_evaluation():
    rng = make_rng(6)
    F = GF(7)
    cm = CentralMap.random(F, 7, 5, 2, 2, rng)
    v = F.random(rng, cm.n_vinegar)
    o = F.random(rng, cm.n_oil)
    M, c = cm.oil_system(v)
    assert np.array_equal(F.add(F.matmul(M, o), c), cm.U.evaluate(np.concatenate([v, o])))


def test_t_inverse_inverts_translation():
    cm = toy.central_map()
    z = F5.random(make_rng(2), (50, 5))
    Fz = cm.system().evaluate(z)
    back = cm.t_inverse().evaluate(np.hstack([Fz[:, :2], z[:, 2:]]))
    assert np.array_equal(back, z[:, :2])
    assert monomial_basis(3, 2, 5) is cm.qmap.basis
