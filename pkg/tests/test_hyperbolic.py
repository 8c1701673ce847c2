import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from polyakov.domain import dirichlet_domain
from polyakov.errors import IncompleteDomain, NotASurfaceGroup, UnsupportedGenus
from polyakov.hyperbolic import (
    build_group,
    classify_element,
    classify_trace,
    explicit_group,
    fenchel_nielsen_group,
    load_group_config,
    relator_defect,
)

from conftest import bolza


def _diag(length):
    return np.diag([math.exp(length / 2), math.exp(-length / 2)])


def test_classify_examples():
    assert classify_trace(2.0).kind == "parabolic"
    assert classify_trace(1.0).kind == "elliptic"
    c = classify_trace(2 * math.cosh(1.0))
    assert c.kind == "hyperbolic" and abs(c.length - 2.0) < 1e-12


def test_classify_length_matches_axis_translation():
    # conjugate diag(e, 1/e) by something generic: translation distance along the axis is 2
    r = np.array([[2.0, 1.0], [3.0, 2.0]])
    m = r @ _diag(2.0) @ np.linalg.inv(r)
    assert abs(classify_element(m).length - 2.0) < 1e-10


matrices = st.tuples(*[st.floats(-3, 3) for _ in range(3)]).filter(lambda t: abs(t[0]) > 0.1)


def _sl2(t):
    a, b, c = t
    return np.array([[a, b], [c, (1 + b * c) / a]])


@given(matrices, st.floats(0.2, 5.0))
def test_classification_conjugation_invariant(t, ell):
    r = _sl2(t)
    m = _diag(ell)
    c1 = classify_element(m)
    c2 = classify_element(r @ m @ np.linalg.inv(r))
    assert c1.kind == c2.kind == "hyperbolic"
    assert abs(c1.length - c2.length) < 1e-10 * max(1.0, np.abs(r).max() ** 4)
    assert classify_element(-m) == c1


def test_bolza_model():
    G = bolza()
    assert G.genus == 2
    assert G.relator_defect() < 1e-12
    assert G.area == 4 * math.pi
    assert all(g.classify().kind == "hyperbolic" for g in G.generators)
    assert max(abs(g.det - 1) for g in G.generators) < 1e-12


@given(matrices)
def test_relator_defect_conjugation_invariant(t):
    G = bolza()
    r = _sl2(t)
    H = G.conjugate(r)
    assert H.relator_defect() < 1e-9


def test_fenchel_nielsen_group():
    F = fenchel_nielsen_group([2, 2, 2], [0, 0, 0]).validate()
    assert F.relator_defect() < 1e-9
    F2 = build_group({"model": "fn", "fn": {"lengths": [2.0, 1.5, 2.5], "twists": [0.3, 0.0, -0.2]}})
    assert F2.relator_defect() < 1e-9


def test_explicit_identity_rejected():
    with pytest.raises(NotASurfaceGroup):
        build_group({"model": "explicit", "explicit.matrices": [np.eye(2).tolist()] * 4})
    with pytest.raises(UnsupportedGenus):
        explicit_group([np.eye(2)] * 2)


def test_explicit_round_trip():
    G = bolza()
    H = build_group({"model": "explicit", "explicit.matrices": [m.tolist() for m in G.matrices()]})
    assert H.relator_defect() < 1e-9


def test_config_file(tmp_path):
    p = tmp_path / "g.toml"
    p.write_text('model = "fn"\n[fn]\nlengths = [2.0, 2.0, 2.0]\ntwists = [0.0, 0.0, 0.0]\n')
    cfg = load_group_config(p)
    assert cfg["fn.lengths"] == [2.0, 2.0, 2.0]
    assert build_group(cfg).genus == 2


def test_bolza_domain():
    D = dirichlet_domain(bolza(), 1j, 8)
    assert abs(D.area - 4 * math.pi) < 1e-6
    assert D.inradius <= D.outradius
    assert len(D.side_matrices) == 8
    with pytest.raises(IncompleteDomain):
        dirichlet_domain(bolza(), 1j, 1)


def test_domain_area_decreases_with_cutoff():
    F = fenchel_nielsen_group([2, 2, 2], [0, 0, 0])
    areas = []
    for k in range(1, 14):
        try:
            D = dirichlet_domain(F, 1j, k)
            areas.append(D.area)
            break
        except IncompleteDomain as exc:
            areas.append(exc.achieved_area)
    assert abs(areas[-1] - 4 * math.pi) < 1e-4
    finite = [a for a in areas if math.isfinite(a)]
    assert all(x >= y - 1e-9 for x, y in zip(finite, finite[1:]))


def test_relator_defect_helper():
    G = bolza()
    assert relator_defect(G.matrices(), G.relator) < 1e-9
