import random

from hypothesis import given, strategies as st

from polyakov import words as W


def _one_vertex_relator(genus, rnd):
    """Random orientable quadratic word in 2g letters; ValueError-free ones only."""
    n = 2 * genus
    while True:
        letters = [k for k in range(1, n + 1)] + [-k for k in range(1, n + 1)]
        rnd.shuffle(letters)
        try:
            W.symplectic_basis(letters, n)
            return tuple(letters)
        except ValueError:
            continue


def test_reduce_and_inverse():
    assert W.reduce([1, 2, -2, -1, 3]) == (3,)
    assert W.inverse((1, -2, 3)) == (-3, 2, -1)
    assert W.concat((1, 2), (-2, 3)) == (1, 3)


def test_power_root():
    assert W.power_root((1, 2, 1, 2, 1, 2)) == ((1, 2), 3)
    assert W.power_root((1, 2, 3))[1] == 1


def test_surface_relator_shape():
    r = W.surface_relator(3)
    assert len(r) == 12
    assert r[:4] == (1, 2, -1, -2)


def test_dehn_solver_relator_trivial():
    D = W.DehnSolver(W.surface_relator(2))
    r = W.surface_relator(2)
    assert D.is_trivial(r)
    assert D.is_trivial(W.inverse(r))
    assert D.is_trivial((3,) + r + (-3,))
    assert not D.is_trivial((1, 2))
    assert not D.is_trivial((1, 2, -1))


@given(st.lists(st.sampled_from([1, 2, 3, 4, -1, -2, -3, -4]), max_size=14), st.integers(0, 7))
def test_dehn_detects_inserted_relators(w, pos):
    D = W.DehnSolver(W.surface_relator(2))
    rel = W.cyclic_conjugates(W.surface_relator(2))[pos]
    k = len(w) // 2
    u = tuple(w[:k]) + rel + tuple(w[k:])
    assert D.equal(u, tuple(w))


@given(st.integers(0, 10_000), st.integers(2, 4))
def test_symplectic_basis_round_trip(seed, genus):
    rnd = random.Random(seed)
    rel = _one_vertex_relator(genus, rnd)
    n = 2 * genus
    fwd, back = W.symplectic_basis(rel, n)
    D = W.DehnSolver(rel)
    # new generators in old letters, then old letters back through them
    for k in range(1, n + 1):
        img = W.substitute(back[k], {i + 1: fwd[i] for i in range(n)})
        assert D.equal(img, (k,))
    # the standard relator in the new generators is trivial in the old group
    std = W.substitute(W.surface_relator(genus), {i + 1: fwd[i] for i in range(n)})
    assert D.is_trivial(std)
