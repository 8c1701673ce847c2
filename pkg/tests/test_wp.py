import numpy as np
import pytest

from polyakov.errors import InsufficientTruncation, InvalidParameter
from polyakov.spectrum import domain_for
from polyakov.wp import (
    WPGram,
    quadratic_differential_basis,
    theta_family,
    theta_series,
    wp_gram,
    wp_volume_density,
)

from conftest import bolza


@pytest.fixture(scope="module")
def basis():
    return quadratic_differential_basis(bolza(), W=8)


def _interior_points(D, k=5, seed=0):
    rng = np.random.default_rng(seed)
    v = D.vertices_klein
    pts = []
    for _ in range(k):
        i = rng.integers(len(v))
        a, b = rng.uniform(0.05, 0.45, 2)
        pts.append(a * v[i] + b * v[(i + 1) % len(v)])
    from polyakov.domain import klein_to_upper

    return klein_to_upper(np.array(pts))


def test_seed_range_checked():
    with pytest.raises(InvalidParameter):
        theta_series(bolza(), 3)
    with pytest.raises(InvalidParameter):
        theta_series(bolza(), -1)


def test_identity_only_truncation_is_flagged():
    with pytest.raises(InsufficientTruncation):
        theta_series(bolza(), 0, W=0)


@pytest.mark.parametrize("j", [0, 2])
def test_automorphy_defect_decreases_with_W(j):
    # odd seeds sum to zero on this surface (the hyperelliptic involution negates them)
    G = bolza()
    D = domain_for(G)
    z = _interior_points(D)
    prev = None
    for W in (4, 6, 8, 10):
        (q,) = theta_family(G, [j], W, domain=D)
        cur = np.array([np.max(q.automorphy_defect(z, g)) for g in D.side_matrices])
        if prev is not None:
            assert np.all(cur <= prev * (1 + 1e-9))
        prev = cur
    # both Theta(z) and Theta(g z) g'(z)^2 carry a truncation tail
    for g in D.side_matrices:
        a, b, c, d = np.asarray(g).ravel()
        gz = (a * z + b) / (c * z + d)
        bound = (q.tail_bound(z) + q.tail_bound(gz) / np.abs(c * z + d) ** 4) / np.abs(q(z))
        assert np.all(q.automorphy_defect(z, g) <= bound)


def test_odd_seed_vanishes():
    G = bolza()
    D = domain_for(G)
    z = _interior_points(D)
    q0, q1 = theta_family(G, [0, 1], 8, domain=D)
    assert np.all(np.abs(q1(z)) <= q1.tail_bound(z))
    assert np.all(q1.tail_bound(z) < 1e-2 * np.abs(q0(z)))


def test_holomorphic(basis):
    Q, _, _ = basis
    z = _interior_points(Q[0].domain)
    for q in Q:
        assert np.max(q.cauchy_riemann_residual(z)) < 1e-6


def test_gram_hermitian_psd_rank(basis):
    Q, gram, fallback = basis
    M = gram.matrix
    assert np.abs(M - M.conj().T).max() < 1e-8
    assert gram.eigenvalues.min() >= -1e-8
    assert gram.rank == 3
    assert len(Q) == 3
    assert np.all(np.diag(M).real > 0)


def test_basis_change_covariance(basis):
    Q, gram, _ = basis
    rng = np.random.default_rng(7)
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    moved = wp_gram(Q, coefficients=A)
    d0 = wp_volume_density(gram)
    d1 = wp_volume_density(moved)
    assert abs(d1 / (d0 * abs(np.linalg.det(A)) ** 2) - 1) < 1e-6


def test_quadrature_refinement(basis):
    Q, gram, _ = basis
    finer = wp_gram(Q, quad_order=8)
    assert np.abs(finer.matrix - gram.matrix).max() <= max(gram.quadrature_error, 1e-12)


def test_volume_density_examples():
    eye = WPGram(np.eye(3), (0, 1, 2), 0, 0.0)
    assert wp_volume_density(eye) == pytest.approx(1.0)
    assert wp_volume_density(np.diag([4.0, 1.0, 1.0])) == pytest.approx(4.0)
