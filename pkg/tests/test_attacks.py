import json
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pesto import toy
from pesto.algebra import GF, all_vectors, make_rng, random_affine_bijection
from pesto.attacks import (AttackReport, common_linear_structures, fit_relations, forge_with_known_a2,
                           high_degree_columns, isolate_quadratic, known_a2_attack, linear_structure_set,
                           linear_structures, linearization_attack, relation_terms, structure_count_multiset,
                           structures_per_component)
from pesto.errors import DegreeTooHigh, ForgeryFailed, IsolationAmbiguous
from pesto.mpoly import Poly, PolySystem, monomial_basis, parse_poly
from pesto.scheme import PestoParams, encrypt, keygen, keygen_from_parts, verify
from pesto.twist import CentralMap, twisted_system

F5 = GF(5)


def random_quadratic(F, n, rng):
    b = monomial_basis(n, 2, F.q)
    return PolySystem(F, b, F.random(rng, (1, len(b))))[0]


# ---------------------------------------------------------------- isolation
def test_high_degree_count_n5():
    sys = PolySystem.zeros(F5, 5, 1, 4)
    assert high_degree_columns(sys).size == 105
    n = 5
    assert 105 == (n + 2) * (n + 1) * (n * n + 7 * n) // 24 == comb(9, 4) - comb(7, 2)


def test_isolate_honest_keys():
    params = PestoParams.parse("2^6,10,8,3,2")
    rng = make_rng(61)
    for _ in range(10):
        _, pk = keygen(params, rng)
        space = isolate_quadratic(pk)
        assert space.dimension >= params.t
        for f in space.components(pk.system):
            assert f.degree() <= 2


def test_isolate_all_quadratic():
    params = PestoParams(GF(7), 5, 3, 3, 1)
    _, pk = keygen(params, make_rng(2))
    assert max(pk.system.degrees()) <= 2
    assert isolate_quadratic(pk).dimension == 3


# ---------------------------------------------------------------- linear structures
def test_structure_example():
    f = parse_poly("x1 + y1^2", F5, ("x1", "y1"))
    V = linear_structures(f)
    assert V.dimension == 1 and V.contains([1, 0]) and not V.contains([0, 1])
    W = linear_structures(f, "brute_force")
    assert W.dimension == 1 and W.contains([3, 0])


def test_twisted_components_have_x_structures():
    cm = toy.central_map()
    G = twisted_system(cm)
    for lam in all_vectors(F5, 2)[1:]:
        f = G.component(np.concatenate([lam, [0, 0]]))
        V = linear_structures(f)
        for a in all_vectors(F5, 2):
            assert V.contains(np.concatenate([a, [0, 0, 0]]))


def test_methods_agree_random_quadratics():
    rng = make_rng(17)
    for _ in range(100):
        f = random_quadratic(F5, 4, rng)
        la = linear_structures(f)
        bf = linear_structure_set(f)
        assert bf.shape[0] == la.size
        for a in bf:
            assert la.contains(a)


@pytest.mark.parametrize("F", [GF(16), GF(64)], ids=str)
def test_methods_agree_binary(F):
    rng = make_rng(4)
    for _ in range(10):
        f = random_quadratic(F, 2, rng)
        assert linear_structure_set(f).shape[0] == linear_structures(f).size


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_structure_set_is_subspace(seed, rank_drop):
    # Use a degenerate quadratic so the structure space is nontrivial.
    rng = make_rng(seed)
    n = 3
    lin = F5.random(rng, (n - rank_drop, n))
    ys = [Poly.affine(F5, row) for row in lin]
    f = sum((y * y for y in ys), Poly.zero(F5, n)) + Poly.affine(F5, F5.random(rng, n))
    S = {tuple(r) for r in linear_structure_set(f).tolist()}
    for a in S:
        for b in S:
            assert tuple(F5.add(np.array(a), np.array(b)).tolist()) in S
        for c in range(5):
            assert tuple(F5.mul(np.array(a), c).tolist()) in S


def test_derivative_needs_quadratic():
    f = Poly(F5, 2, {(3, 0): 1})
    with pytest.raises(DegreeTooHigh):
        linear_structures(f)


def test_common_structures_basic():
    x, y, z = (Poly.var(F5, 3, i) for i in range(3))
    f = x * x + y
    V = common_linear_structures([f])
    assert V.dimension == linear_structures(f).dimension == 2
    g = y * y + z * z
    h = x * x
    assert common_linear_structures([g, h]).dimension == 0


def test_common_structures_white_box():
    params = PestoParams.parse("2^6,10,8,3,2")
    rng = make_rng(8)
    F = params.field
    for _ in range(5):
        sk, pk = keygen(params, rng)
        comps = isolate_quadratic(pk).components(pk.system)
        V = common_linear_structures(comps)
        assert V.dimension == params.t
        img = F.matmul(V.basis, sk.A2.linear.T)
        assert not img[:, params.t :].any()


# ---------------------------------------------------------------- multisets
def test_multiset_of_linear_system():
    rng = make_rng(3)
    b = monomial_basis(3, 1, 5)
    sys = PolySystem(F5, b, F5.random(rng, (2, len(b))))
    ms = structure_count_multiset(sys)
    assert ms == {125: 24}


def test_structure_correspondence():
    params = PestoParams(F5, 4, 3, 1, 1)
    rng = make_rng(12)
    sk, pk = keygen(params, rng, reduced_a1=False)
    G = twisted_system(sk.central)
    lams, pts, mask = structures_per_component(pk.system)
    for j in rng.choice(len(lams), 10, replace=False):
        lam = lams[j]
        lamG = F5.matmul(sk.A1.linear.T, lam)
        target = {tuple(r) for r in linear_structure_set(G.component(lamG)).tolist()}
        mine = pts[mask[:, j]]
        assert len(mine) == len(target)
        for a in mine:
            assert tuple(F5.matmul(sk.A2.linear, a).tolist()) in target


# ---------------------------------------------------------------- linearization
def test_relation_terms_count():
    assert len(relation_terms(8, 8)) == 64 + 36 + 8 + 8 + 1


def test_linearization_on_affine_map():
    F = GF(7)
    rng = make_rng(5)
    B = random_affine_bijection(4, F, rng)
    b = monomial_basis(4, 1, F.q)
    C = np.zeros((4, len(b)), dtype=np.int64)
    C[:, 0] = B.translation
    for i in range(4):
        C[:, b.index[tuple(int(k == i) for k in range(4))]] = B.linear[:, i]
    sys = PolySystem(F, b, C)
    rel, _ = fit_relations(sys, rng)
    assert rel.shape[0] >= 4
    for _ in range(10):
        z = F.random(rng, 4)
        rep = linearization_attack(sys, sys.evaluate(z), rng, relations=rel)
        assert rep.success and rep.candidates == [z.tolist()]


def test_linearization_s0_and_s1():
    F = GF(64)
    rng = make_rng(2)
    p0 = PestoParams(F, 8, 8, 1, 0, allow_zero_vinegar=True)
    _, pk = keygen(p0, rng)
    rel, _ = fit_relations(pk, rng)
    assert rel.shape[0] > 0
    hits = 0
    for _ in range(10):
        w = pk.system.evaluate(F.random(rng, 8))
        rep = linearization_attack(pk, w, rng, relations=rel)
        hits += rep.success
        for c in rep.candidates:
            assert verify(pk, w, np.array(c))
    assert hits >= 9
    p1 = PestoParams(F, 8, 8, 1, 1, allow_zero_vinegar=True)
    _, pk1 = keygen(p1, rng)
    rep = linearization_attack(pk1, pk1.system.evaluate(F.random(rng, 8)), rng)
    assert not rep.success and rep.details["relations"] == 0


# ---------------------------------------------------------------- known A2
def test_known_a2_toy(toy_keys):
    _, sk, pk = toy_keys
    rng = make_rng(40)
    for _ in range(20):
        c = encrypt(pk, F5.random(rng, 5))
        z = forge_with_known_a2(pk, sk.A2, c)
        assert np.array_equal(encrypt(pk, z), c)


def test_known_a2_working_scale(small_keys):
    params, sk, pk = small_keys
    rng = make_rng(41)
    c = encrypt(pk, params.field.random(rng, params.n))
    rep = known_a2_attack(pk, sk.A2, c)
    assert rep.success
    assert verify(pk, c, np.array(rep.candidates[0]))
    data = json.loads(rep.to_json())
    assert data["attack"] == "known-a2" and data["success"] is True


def test_known_a2_wrong_transform(toy_keys):
    _, sk, pk = toy_keys
    rng = make_rng(3)
    wrong = random_affine_bijection(5, F5, rng)
    c = encrypt(pk, F5.random(rng, 5))
    try:
        z = forge_with_known_a2(pk, wrong, c)
    except (IsolationAmbiguous, ForgeryFailed):
        return
    # anything returned must still be a genuine preimage
    assert np.array_equal(encrypt(pk, z), c)


def test_known_a2_zero_vinegar_is_linear():
    F = GF(7)
    params = PestoParams(F, 6, 6, 2, 0, allow_zero_vinegar=True)
    rng = make_rng(9)
    sk, pk = keygen(params, rng)
    rep = AttackReport("known-a2", False)
    c = encrypt(pk, F.random(rng, 6))
    z = forge_with_known_a2(pk, sk.A2, c, report=rep)
    assert np.array_equal(encrypt(pk, z), c)
    assert rep.details["enumerated_variables"] == 0


def test_report_text():
    rep = AttackReport("iso-quad", True, {"dimension": 3}, [[1, 2]])
    text = rep.to_text()
    assert "success: true" in text and "candidate: 1 2" in text


def test_keygen_from_parts_toy_matches(toy_keys):
    params, sk, pk = toy_keys
    cm = CentralMap.random(F5, 5, 4, 2, 1, make_rng(0))
    sk2, pk2 = keygen_from_parts(params, cm, sk.A1, sk.A2)
    assert isolate_quadratic(pk2).dimension >= 2
