import json
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polyakov import words as W
from polyakov.covers import (
    CoverNode,
    SurfaceGroupPresentation,
    act,
    census_dot,
    compose_morphisms,
    compose_vaut,
    cover_domain,
    cover_genus,
    cover_morphism,
    cover_relator_defect,
    enumerate_covers,
    germ_equal,
    identity_vaut,
    lift_spectrum,
    make_node,
    meet,
    subgroup_generators,
    trivial_node,
    two_arrow_cycle,
)
from polyakov.errors import BudgetExceeded, DisconnectedCover, TowerMismatch, UncertifiedSpectrum
from polyakov.spectrum import enumerate_spectrum
from polyakov.zeta import zeta_truncated

from conftest import bolza, bolza_spectrum, census
from oracles import hall_subgroup_counts, z2_homomorphism_count


def test_presentation():
    P = SurfaceGroupPresentation(3)
    assert len(P.relator) == 12 and P.abelianization_rank() == 6


def test_cover_genus():
    assert cover_genus(2, 2) == 3
    assert cover_genus(3, 2) == 4
    assert cover_genus(1, 5) == 5


@pytest.mark.parametrize("n", [1, 2, 3])
def test_census_against_oracles(n):
    C = census(n)
    assert C.based_count == hall_subgroup_counts(3, 2)[n - 1]
    if n == 1:
        assert C.unbased_count == 1 and C.nodes[0].genus == 2
    if n == 2:
        assert C.based_count == z2_homomorphism_count(2) == 15
    for node in C.nodes:
        assert node.transitive
        assert n * (2 - 1) == node.genus - 1
        for p in range(n):
            assert act(node.perms, p, W.surface_relator(2)) == p


def test_census_is_deterministic_and_exported():
    a = enumerate_covers(2, 3)
    assert a.to_json() == census(3).to_json()
    d = json.loads(a.to_json())
    assert set(d) == {"n", "based_count", "unbased_count", "nodes"}
    dot = census_dot(list(census(1).nodes) + list(census(2).nodes[:3]))
    assert dot.startswith("digraph") and "->" in dot


def test_budget_is_all_or_nothing():
    with pytest.raises(BudgetExceeded):
        enumerate_covers(2, 4, budget=10)


def test_disconnected_cover_rejected():
    ident = (0, 1)
    with pytest.raises(DisconnectedCover):
        make_node([ident] * 4, 2)


@settings(max_examples=30)
@given(st.integers(0, 99), st.permutations(range(3)))
def test_unbased_key_is_conjugation_invariant(i, sigma):
    node = census(3).nodes[i % census(3).unbased_count]
    inv = [0] * 3
    for a, b in enumerate(sigma):
        inv[b] = a
    conj = [tuple(sigma[p[inv[x]]] for x in range(3)) for p in node.perms]
    other = CoverNode(tuple(conj), 2)
    assert other.unbased_key() == node.unbased_key()


def test_morphisms_and_meets():
    H, K = census(2).nodes[0], census(2).nodes[1]
    T = trivial_node(2)
    assert meet(H, H) == H
    assert meet(T, H) == H
    M = meet(H, K)
    assert M.index == 4
    mH, mK = cover_morphism(M, H), cover_morphism(M, K)
    assert mH.verify() and mK.verify() and mH.degree == 2
    to_base = compose_morphisms(mH, cover_morphism(H, T))
    assert to_base.verify() and to_base.degree == 4
    with pytest.raises(TowerMismatch):
        cover_morphism(H, K)
    # containment witness checked on words: every word fixing the base sheet of M fixes it in H and K
    rnd = random.Random(3)
    for _ in range(200):
        w = tuple(rnd.choice([1, 2, 3, 4, -1, -2, -3, -4]) for _ in range(rnd.randint(1, 10)))
        if M.contains(w):
            assert H.contains(w) and K.contains(w)


def test_subgroup_generators():
    T = trivial_node(2)
    assert tuple(subgroup_generators(T).word_map) == tuple((k,) for k in range(1, 5))
    for node in census(2).nodes[:5]:
        pres = subgroup_generators(node)
        assert len(pres.word_map) == 6
        assert all(node.contains(w) for w in pres.word_map)
        assert W.DehnSolver(W.surface_relator(2)).is_trivial(pres.relator_image())
    assert cover_relator_defect(bolza(), census(2).nodes[0]) < 1e-8


def test_rewrite_round_trip():
    node = census(3).nodes[7]
    pres = subgroup_generators(node)
    solver = W.DehnSolver(W.surface_relator(2))
    rnd = random.Random(1)
    for _ in range(50):
        u = [rnd.choice([1, -1]) * rnd.randint(1, len(pres.word_map)) for _ in range(rnd.randint(1, 5))]
        w = W.substitute(tuple(u), {i + 1: g for i, g in enumerate(pres.word_map)})
        back = W.substitute(pres.rewrite(w), {i + 1: g for i, g in enumerate(pres.word_map)})
        assert solver.equal(back, w)


def test_lift_trivial_and_transposition():
    S = bolza_spectrum(4)
    T = lift_spectrum(S, trivial_node(2))
    assert np.allclose(T.multiset(), S.multiset())
    sys_word = S.classes[0].words[0]
    for node in census(2).nodes:
        if act(node.perms, 0, sys_word) == 1:
            L = lift_spectrum(bolza_spectrum(6.2), node)
            assert any(abs(c.length - 2 * S.classes[0].length) < 1e-9 for c in L.classes)
            break
    else:
        pytest.fail("no index-2 node moves the systole")
    bad = type(S)(S.cutoff, S.classes, {"complete": False}, S.genus)
    with pytest.raises(UncertifiedSpectrum):
        lift_spectrum(bad, trivial_node(2))


def test_lift_matches_direct_enumeration():
    node = census(2).nodes[0]
    Gc, D = cover_domain(bolza(), node)
    direct = enumerate_spectrum(Gc, 4.0, domain=D)
    lifted = lift_spectrum(bolza_spectrum(4), node)
    a, b = direct.multiset(), lifted.multiset()
    assert len(a) == len(b) and np.abs(a - b).max() < 1e-9


def _sign_factor_log(spec, node, s, L, kmax=60):
    """log Z_H - log Z_G for an index-2 cover, from the sheet action of each base class."""
    ks = np.arange(kmax)
    total = 0.0
    for c in spec.classes:
        for w in c.words:
            x = np.exp(-c.length * (s + ks))
            if act(node.perms, 0, w) == 0:
                total += np.log1p(-x).sum()
            elif 2 * c.length <= L:
                total += np.log1p(x).sum()
            else:
                total -= np.log1p(-x).sum()
    return total


@pytest.mark.parametrize("i", [0, 3, 11])
def test_cover_zeta_factorisation(i):
    node = census(2).nodes[i]
    base = bolza_spectrum(6)
    lifted = lift_spectrum(base, node)
    for s in (1.5, 2.0, 3.0):
        zh = zeta_truncated(lifted, s, n_max=59).log_value
        zg = zeta_truncated(base, s, n_max=59).log_value
        assert abs(zh - zg - _sign_factor_log(base, node, s, 6.0)) < 1e-12


def test_vaut_small_laws():
    I = identity_vaut(2)
    nodes = census(2).nodes
    H, K = nodes[2], nodes[9]
    r = two_arrow_cycle(H, K)
    assert germ_equal(compose_vaut(r, r.inverse), I)
    assert germ_equal(compose_vaut(I, r), r)
    assert germ_equal(two_arrow_cycle(H, H), I)
    s = two_arrow_cycle(K, nodes[4])
    u = two_arrow_cycle(nodes[4], H)
    assert germ_equal(compose_vaut(compose_vaut(u, s), r), compose_vaut(u, compose_vaut(s, r)))
    with pytest.raises(TowerMismatch):
        two_arrow_cycle(H, census(3).nodes[0])
