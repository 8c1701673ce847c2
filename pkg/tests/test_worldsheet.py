import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from polyakov.errors import IncompleteSpectrum, InvalidModulus, InvalidParameter
from polyakov.worldsheet import (
    GaussianModel,
    build_genus2_mesh,
    build_torus_mesh,
    continuum_torus_det,
    dedekind_eta,
    dirichlet_energy,
    cotan_laplacian,
    gaussian_reduction_check,
    harmonic_one_forms,
    heat_trace_zeta0,
    hodge_gram,
    log_zeta_det,
    read_off,
    scalar_laplacian_spectrum,
    scaling_invariance_check,
    spectrum_from_values,
    star_defect,
    torus_det_ratio,
    write_off,
    zeta_det,
)

from conftest import torus_spectrum
from oracles import eta_mpmath, lattice_torus_eigenvalues, torus_det_oracle

TAUS = [1j, 2j, 0.3 + 0.8j, -0.45 + 1.1j]


@pytest.fixture(scope="module")
def genus2():
    return build_genus2_mesh(1)


def test_torus_mesh_basics():
    M = build_torus_mesh(1j, 16)
    assert M.genus == 1 and M.euler_characteristic == 0
    assert abs(M.area - 1.0) < 1e-12
    M.validate()
    A = build_torus_mesh(2j, 16)
    w = A.meta["stencil"]["w"]
    assert A.genus == 1 and abs(w[0] - w[1]) > 0.5
    with pytest.raises(InvalidModulus):
        build_torus_mesh(1 - 0.1j, 16)
    with pytest.raises(InvalidParameter):
        build_torus_mesh(1j, 4)


def test_genus2_mesh(genus2):
    genus2.validate()
    assert genus2.genus == 2
    assert build_genus2_mesh(2).n_faces == 4 * genus2.n_faces


@pytest.mark.parametrize("tau", TAUS)
def test_torus_spectrum_matches_fourier_oracle(tau):
    M, S = torus_spectrum(tau, 16)
    assert np.allclose(np.sort(S.eigenvalues), lattice_torus_eigenvalues(tau, 16), atol=1e-9, rtol=1e-9)
    assert S.zero_mode_count == 1
    assert S.eigenvalues.min() >= -1e-10


def test_first_eigenvalue_near_continuum():
    _, S = torus_spectrum(1j, 32)
    lam1 = np.sort(S.eigenvalues)[1]
    assert abs(lam1 / (4 * math.pi ** 2) - 1) < 0.02


def test_partial_spectrum_agrees(genus2):
    full = scalar_laplacian_spectrum(genus2)
    low = scalar_laplacian_spectrum(genus2, k=6)
    assert np.allclose(np.sort(full.eigenvalues)[:6], np.sort(low.eigenvalues), atol=1e-8)
    assert full.zero_mode_count == low.zero_mode_count == 1
    with pytest.raises(IncompleteSpectrum):
        log_zeta_det(low)


@given(st.lists(st.floats(0.01, 100.0), min_size=1, max_size=20))
def test_zeta_det_order_invariant(vals):
    a = zeta_det(spectrum_from_values([0.0] + vals))
    b = zeta_det(spectrum_from_values(list(reversed(vals)) + [0.0]))
    assert a == pytest.approx(b, rel=1e-12)


def test_zeta_det_example():
    assert zeta_det(spectrum_from_values([0.0, 2.0, 3.0])) == pytest.approx(6.0)


@given(st.integers(0, 2 ** 32 - 1))
def test_dirichlet_energy_identity(seed):
    M = build_torus_mesh(0.3 + 0.8j, 10)
    f = np.random.default_rng(seed).normal(size=M.n_vertices)
    L, _ = cotan_laplacian(M)
    assert abs(dirichlet_energy(M, f) - f @ (L @ f)) < 1e-10 * max(1.0, abs(f @ (L @ f)))


@pytest.mark.parametrize("tau", TAUS)
def test_continuum_det_against_mpmath(tau):
    assert abs(dedekind_eta(tau) - eta_mpmath(tau)) < 1e-12
    assert continuum_torus_det(tau) == pytest.approx(torus_det_oracle(tau), rel=1e-12)
    assert continuum_torus_det(tau, unit_area=False) == pytest.approx(torus_det_oracle(tau, False), rel=1e-12)


@pytest.mark.parametrize("tau", TAUS)
def test_continuum_det_modular(tau):
    v = continuum_torus_det(tau)
    assert abs(continuum_torus_det(-1 / tau) - v) < 1e-10
    assert abs(continuum_torus_det(tau + 1) - v) < 1e-12
    assert abs(continuum_torus_det(tau, method="product") - v) < 1e-10


def test_det_ratio_improves_under_refinement():
    errs = []
    for n in (16, 32):
        M1, S1 = torus_spectrum(1j, n)
        M2, S2 = torus_spectrum(2j, n)
        errs.append(torus_det_ratio(M1, M2, S1, S2)["relative_error"])
    assert errs[1] < errs[0] and errs[1] < 0.05


def test_scaling_rule():
    M, S = torus_spectrum(1j, 32)
    assert scaling_invariance_check(M, 1.0, S)["ratio"] == 1.0
    assert scaling_invariance_check(M, 2.0, S)["ratio"] == 1.0
    with pytest.raises(InvalidParameter):
        scaling_invariance_check(M, -1.0, S)


def test_heat_fit_coarse():
    M, S = torus_spectrum(1j, 32)
    fit = heat_trace_zeta0(S, M.area)
    assert abs(fit["zeta0"] + 1) < 0.05


def test_gaussian_examples():
    assert GaussianModel((1.0,)).closed_form() == pytest.approx(math.sqrt(math.pi))
    assert GaussianModel((1.0, 4.0)).closed_form() == pytest.approx(math.pi / 2)
    assert GaussianModel((1.0,), area=4.0).reduced_form() == 2.0
    r = gaussian_reduction_check(GaussianModel((1.0,)), samples=1_000_000, seed=11)
    assert abs(r["z_score"]) < 3 and r["seed"] == 11


@given(st.lists(st.floats(0.1, 10.0), min_size=1, max_size=6), st.floats(0.1, 50.0))
def test_reduced_form_wiring(lam, area):
    gm = GaussianModel(tuple(lam), area=area)
    expect = math.sqrt(area) * float(np.prod(np.asarray(lam) ** -0.5))
    assert gm.reduced_form() == pytest.approx(expect, rel=1e-12)
    assert GaussianModel(tuple(lam)).closed_form() == pytest.approx(
        math.pi ** (len(lam) / 2) * float(np.prod(np.asarray(lam) ** -0.5)), rel=1e-12)


def test_gaussian_deterministic():
    gm = GaussianModel((0.7, 2.0, 3.5))
    assert gaussian_reduction_check(gm, 2000, 5) == gaussian_reduction_check(gm, 2000, 5)


@pytest.mark.parametrize("tau", [1j, 0.3 + 0.8j])
def test_torus_harmonic_forms(tau):
    M = build_torus_mesh(tau, 12)
    B = harmonic_one_forms(M)
    assert B.dimension == 2
    assert B.closed_residual < 1e-8 and B.coclosed_residual < 1e-8
    G = hodge_gram(B)
    assert np.abs(G - G.conj().T).max() < 1e-8
    assert np.linalg.eigvalsh(G).min() > 0
    assert abs(G[0, 0].real - tau.imag) < 0.02 * tau.imag


def test_genus2_harmonic_forms(genus2):
    B = harmonic_one_forms(genus2)
    assert B.dimension == 4
    assert B.closed_residual < 1e-8 and B.coclosed_residual < 1e-8
    G = hodge_gram(B)
    assert G.shape == (2, 2)
    assert np.abs(G - G.conj().T).max() < 1e-8
    assert np.linalg.eigvalsh(G).min() > 0
    # the wedge pairing of the cycle-dual basis is the integer intersection form
    assert np.allclose(B.wedge, np.round(B.wedge), atol=1e-10)
    assert star_defect(B) < 0.5


def test_off_round_trip(tmp_path, genus2):
    p = tmp_path / "m.off"
    write_off(genus2, p)
    R = read_off(p)
    assert np.array_equal(R.triangles, genus2.triangles)
    assert np.allclose(R.lengths, genus2.lengths, rtol=0, atol=0)
    assert R.cycles == genus2.cycles
    assert R.genus == 2
