"""Quadratic differentials from Poincare series and their Weil-Petersson Gram matrix.

Seeds are f_j(z) = (z - i)^j / (z + i)^(j+4); in the disk coordinate
u = (z - i)/(z + i) this is the differential -u^j du^2 / 4, so the series for
seed j transforms under a rotation about i like u^j du^2. All computations
happen in the frame where the Dirichlet center is i.

Truncation keeps the group elements reachable within ``W`` side pairings of
the Dirichlet domain that move i by at most ``radius``. Each term obeys
|f_j(g z) g'(z)^2| <= 1 / (16 cosh^4(d/2) y^2) with d = d(g z, i), and the
orbit of z has about 2 pi sinh d / area points per unit distance, so the
omitted terms sum to roughly 1 / (8 (g - 1) (cosh r + 1) y^2).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .domain import DirichletDomain, enumerate_ball, klein_to_upper
from .errors import DegenerateBasis, InsufficientTruncation, InvalidParameter, UnreliableGram
from .hyperbolic import FuchsianGroupModel
from .spectrum import domain_for, side_generators

DEFAULT_RADIUS = 10.0
TAIL_LIMIT = 0.10
CHUNK = 2048
POINT_CHUNK = 4096
RICHARDSON = 3.0

# Dunavant degree-5 rule on the reference triangle (barycentric points, weights sum to 1)
_A1, _B1 = 0.059715871789770, 0.470142064105115
_A2, _B2 = 0.797426985353087, 0.101286507323456
_W0, _W1, _W2 = 0.225, 0.132394152788506, 0.125939180544827
DUNAVANT5 = (
    np.array(
        [
            [1 / 3, 1 / 3, 1 / 3],
            [_A1, _B1, _B1],
            [_B1, _A1, _B1],
            [_B1, _B1, _A1],
            [_A2, _B2, _B2],
            [_B2, _A2, _B2],
            [_B2, _B2, _A2],
        ]
    ),
    np.array([_W0, _W1, _W1, _W1, _W2, _W2, _W2]),
)


def seed(j: int, z):
    z = np.asarray(z, dtype=complex)
    return (z - 1j) ** j / (z + 1j) ** (j + 4)


def series_tail(genus: int, radius: float, y=1.0):
    """Approximate size of the terms beyond displacement ``radius`` at height y."""
    return 1.0 / (8.0 * (genus - 1) * (math.cosh(radius) + 1.0)) / np.asarray(y, float) ** 2


class ThetaSum:
    """Shared evaluator for a family of seeds over one truncated element set."""

    def __init__(self, elements: np.ndarray, jmax: int):
        self.elements = elements
        self.jmax = int(jmax)
        self._cache: dict = {}

    def values(self, z: np.ndarray) -> np.ndarray:
        """(jmax + 1, *z.shape) array of series values for seeds 0..jmax."""
        z = np.asarray(z, dtype=complex)
        key = (z.shape, z.tobytes())
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        flat = z.ravel()
        acc = np.zeros((self.jmax + 1, flat.size), complex)
        for p0 in range(0, flat.size, POINT_CHUNK):
            zs = flat[None, p0:p0 + POINT_CHUNK]
            for k in range(0, len(self.elements), CHUNK):
                m = self.elements[k:k + CHUNK]
                a, b, c, d = (m[:, 0, 0, None], m[:, 0, 1, None], m[:, 1, 0, None], m[:, 1, 1, None])
                den = c * zs + d
                w = (a * zs + b) / den
                wp = w + 1j
                u = (w - 1j) / wp
                term = 1.0 / (wp * den) ** 4
                for j in range(self.jmax + 1):
                    acc[j, p0:p0 + POINT_CHUNK] += term.sum(axis=0)
                    if j < self.jmax:
                        term = term * u
        out = acc.reshape((self.jmax + 1,) + z.shape)
        if len(self._cache) > 8:
            self._cache.clear()
        self._cache[key] = out
        return out


@dataclass
class QuadDifferential:
    """Truncated Poincare series of seed j.

    ``effective_radius`` is the displacement up to which the sum over group
    elements is complete; ``tail_relative`` compares the omitted part with
    the size of the seed itself on the domain.
    """

    j: int
    group: FuchsianGroupModel
    W: int
    domain: DirichletDomain
    evaluator: ThetaSum
    effective_radius: float
    tail_relative: float = math.inf

    @property
    def elements(self) -> np.ndarray:
        return self.evaluator.elements

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return self.evaluator.values(z)[self.j]

    def tail_bound(self, z) -> np.ndarray:
        return series_tail(self.group.genus, self.effective_radius, np.imag(z))

    def automorphy_defect(self, z, g: np.ndarray) -> np.ndarray:
        """|Theta(g z) g'(z)^2 - Theta(z)| / |Theta(z)| at the points z."""
        z = np.asarray(z, complex)
        a, b, c, d = np.asarray(g, float).ravel()
        gz = (a * z + b) / (c * z + d)
        lhs = self(gz) / (c * z + d) ** 4
        rhs = self(z)
        return np.abs(lhs - rhs) / np.abs(rhs)

    def cauchy_riemann_residual(self, z, h: float = 1e-5) -> np.ndarray:
        """|d/dzbar| relative to |d/dz| by central differences."""
        z = np.asarray(z, complex)
        fx = (self(z + h) - self(z - h)) / (2 * h)
        fy = (self(z + 1j * h) - self(z - 1j * h)) / (2 * h)
        return np.abs(fx + 1j * fy) / np.maximum(np.abs(fx - 1j * fy), 1e-300)


def _domain_samples(D: DirichletDomain, n: int = 4) -> np.ndarray:
    """Center, vertices and interior points of the fan triangles (Klein coordinates)."""
    v = D.vertices_klein
    pts = [np.zeros(2)]
    for k in range(len(v)):
        p, q = v[k], v[(k + 1) % len(v)]
        pts.append(p)
        for t in np.linspace(0, 1, n + 1)[1:-1]:
            pts.append(0.5 * ((1 - t) * p + t * q))
    return klein_to_upper(np.array(pts))


def _theta_elements(D: DirichletDomain, W: int, radius: float):
    gens, words = side_generators(D)
    ball = enumerate_ball(gens, words, radius + D.outradius, W)
    keep = ball.displacement <= radius
    r_eff = radius if ball.complete else min(radius, ball.cut_radius - D.outradius)
    return ball.matrices[keep], max(r_eff, 0.0)


def seed_scale(j: int, D: DirichletDomain) -> float:
    """max of |f_j| y^2 = |u|^j (1 - |u|^2)^2 / 16 over the disk |u| <= tanh(R/2) containing D."""
    rho2 = math.tanh(D.outradius / 2.0) ** 2
    t = min(j / (j + 4.0), rho2)
    return t ** (j / 2.0) * (1.0 - t) ** 2 / 16.0


def theta_family(G: FuchsianGroupModel, js: Sequence[int], W: int = 8, *, radius: float = DEFAULT_RADIUS,
                 domain: Optional[DirichletDomain] = None) -> List[QuadDifferential]:
    """Series for several seeds sharing one element enumeration."""
    D = domain if domain is not None else domain_for(G)
    elems, r_eff = _theta_elements(D, W, radius)
    js = [int(j) for j in js]
    ev = ThetaSum(elems, max(js))
    tail = float(series_tail(G.genus, r_eff, 1.0))
    return [QuadDifferential(j, D.group, W, D, ev, r_eff, tail / seed_scale(j, D)) for j in js]


def theta_series(
    G: FuchsianGroupModel,
    j: int,
    W: int = 8,
    *,
    radius: float = DEFAULT_RADIUS,
    domain: Optional[DirichletDomain] = None,
    extended: bool = False,
    check: bool = True,
) -> QuadDifferential:
    """Poincare series of seed j over the group elements within W side pairings.

    ``extended`` allows seeds beyond the 3g - 3 defaults (used by the rank
    fallback). Raises ``InsufficientTruncation`` when the tail estimate at the
    domain center exceeds 10% of the seed's size on the domain.
    """
    top = 3 * G.genus - 4
    if j < 0 or (j > top and not extended):
        raise InvalidParameter(f"seed index {j} outside 0..{top}")
    if W < 0:
        raise InvalidParameter("W must be >= 0")
    (Q,) = theta_family(G, [j], W, radius=radius, domain=domain)
    if check and Q.tail_relative > TAIL_LIMIT:
        raise InsufficientTruncation(
            f"tail estimate is {Q.tail_relative:.3g} of the seed size (W={W})", result=Q
        )
    return Q


# ---------------------------------------------------------------- quadrature


def klein_quadrature(D: DirichletDomain, m: int) -> Tuple[np.ndarray, np.ndarray]:
    """Points (upper half-plane) and weights for integrating f dx dy over D.

    Fan triangles from the center, each split into m^2 congruent pieces in
    Klein coordinates; the weights carry the Jacobian y^2 / (1 - |k|^2)^(3/2).
    """
    bary, wts = DUNAVANT5
    v = D.vertices_klein
    pts, ws = [], []
    for k in range(len(v)):
        A, B, C = np.zeros(2), v[k], v[(k + 1) % len(v)]
        for tri in _subdivide(A, B, C, m):
            P = bary @ np.array(tri)
            area = 0.5 * abs((tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1]) - (tri[2][0] - tri[0][0]) * (tri[1][1] - tri[0][1]))
            pts.append(P)
            ws.append(wts * area)
    K = np.concatenate(pts)
    w = np.concatenate(ws)
    z = klein_to_upper(K)
    jac = np.imag(z) ** 2 / (1.0 - np.sum(K * K, axis=1)) ** 1.5
    return z, w * jac


def _subdivide(A, B, C, m):
    def P(i, j):
        return A + (B - A) * (i / m) + (C - A) * (j / m)

    out = []
    for i in range(m):
        for j in range(m - i):
            out.append((P(i, j), P(i + 1, j), P(i, j + 1)))
            if i + j < m - 1:
                out.append((P(i + 1, j), P(i + 1, j + 1), P(i, j + 1)))
    return out


@dataclass(frozen=True)
class WPGram:
    matrix: np.ndarray
    seeds: Tuple[int, ...]
    triangles: int
    quadrature_error: float
    meta: dict = field(default_factory=dict)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))

    @property
    def rank(self) -> int:
        ev = self.eigenvalues
        noise = max(10.0 * self.quadrature_error, 1e-10 * float(np.abs(ev).max(initial=0.0)))
        return int(np.sum(ev > noise))

    def to_json(self) -> str:
        return json.dumps(
            {
                "matrix": [[[float(x.real), float(x.imag)] for x in row] for row in self.matrix],
                "seeds": list(self.seeds),
                "quadrature": {"triangles": self.triangles, "error_estimate": self.quadrature_error},
                "meta": self.meta,
            },
            indent=1,
            sort_keys=True,
        )


def _gram_values(values: np.ndarray, z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """values: (k, P) differential values at z. Returns sum_p w y^2 V_i conj(V_j)."""
    wy = w * np.imag(z) ** 2
    return (values * wy) @ values.conj().T


def wp_gram(Q: Sequence[QuadDifferential], D: Optional[DirichletDomain] = None, quad_order: int = 4,
            coefficients: Optional[np.ndarray] = None, check: bool = True) -> WPGram:
    """Gram matrix of the pairing int_D Q_i conj(Q_j) y^2 dx dy.

    ``quad_order`` is the subdivision level m of each fan triangle; the error
    estimate compares levels m and 2m, assuming only second-order convergence. ``coefficients`` (k x n) replaces the differentials by linear
    combinations A Q before pairing.
    """
    if not Q:
        raise InvalidParameter("need at least one differential")
    D = D if D is not None else Q[0].domain
    for q in Q:
        if q.group is not D.group:
            raise InvalidParameter("differentials and domain must share one group")
    grams = []
    for m in (quad_order, 2 * quad_order):
        z, w = klein_quadrature(D, m)
        V = np.array([q(z) for q in Q])
        for q in Q:
            q.evaluator._cache.clear()
        if coefficients is not None:
            V = np.asarray(coefficients) @ V
        grams.append(_gram_values(V, z, w))
    G1, G2 = grams
    # the degree-5 rule would give 2^6 - 1, but the higher seeds oscillate on
    # the coarse levels and observed convergence is closer to second order
    err = float(np.abs(G2 - G1).max()) / RICHARDSON
    M = G2
    out = WPGram(M, tuple(q.j for q in Q), len(D.vertices_klein) * (2 * quad_order) ** 2, err,
                 {"quad_order": quad_order, "tail_relative": max(q.tail_relative for q in Q)})
    return _checked(out) if check else out


def _checked(gram: WPGram) -> WPGram:
    lam = float(gram.eigenvalues.min())
    if lam > 0 and gram.quadrature_error > 0.05 * lam:
        raise UnreliableGram(f"quadrature error {gram.quadrature_error:.3g} vs smallest eigenvalue {lam:.3g}",
                             result=gram)
    return gram


def _sub_gram(gram: WPGram, idx: Sequence[int]) -> WPGram:
    idx = list(idx)
    meta = dict(gram.meta)
    meta["selected_from"] = list(gram.seeds)
    return WPGram(gram.matrix[np.ix_(idx, idx)], tuple(gram.seeds[i] for i in idx), gram.triangles,
                  gram.quadrature_error, meta)


def independent_seeds(gram: np.ndarray, count: int, tol: float) -> List[int]:
    """Greedy pivoted Cholesky: indices of a maximal well-conditioned subset."""
    A = np.array(gram, dtype=complex)
    n = A.shape[0]
    chosen: List[int] = []
    resid = np.real(np.diag(A)).copy()
    L = np.zeros((n, 0), complex)
    for _ in range(min(count, n)):
        cand = [i for i in range(n) if i not in chosen]
        i = max(cand, key=lambda k: (resid[k], -k))
        if resid[i] <= tol:
            break
        col = (A[:, i] - L @ L[i].conj()) / math.sqrt(resid[i])
        L = np.column_stack([L, col])
        resid = resid - np.abs(col) ** 2
        chosen.append(i)
    return sorted(chosen)


def quadratic_differential_basis(
    G: FuchsianGroupModel,
    W: int = 8,
    *,
    seeds: Optional[Sequence[int]] = None,
    radius: float = DEFAULT_RADIUS,
    domain: Optional[DirichletDomain] = None,
    quad_order: int = 4,
    extra: int = 6,
) -> Tuple[List[QuadDifferential], WPGram, bool]:
    """3g - 3 Poincare series with a rank-3g-3 Gram, plus whether the fallback ran.

    The default seeds are 0..3g-4. If their Gram is singular beyond the
    quadrature noise, seeds up to 3g-4+extra are computed and a maximal
    independent subset is chosen by pivoted elimination.
    """
    D = domain if domain is not None else domain_for(G)
    n = 3 * G.genus - 3
    js = list(seeds) if seeds is not None else list(range(n))
    Q = theta_family(G, js, W, radius=radius, domain=D)
    for q in Q:
        if q.tail_relative > TAIL_LIMIT:
            raise InsufficientTruncation(f"tail {q.tail_relative:.3g} for seed {q.j}", result=q)
    gram = wp_gram(Q, D, quad_order, check=False)
    if gram.rank == n:
        return Q, _checked(gram), False
    pool = theta_family(G, range(n + extra), W, radius=radius, domain=D)
    big = wp_gram(pool, D, quad_order, check=False)
    tol = max(10.0 * big.quadrature_error, 1e-10 * float(np.abs(np.diag(big.matrix)).max()))
    pick = independent_seeds(big.matrix, n, tol)
    if len(pick) < n:
        raise DegenerateBasis(f"only {len(pick)} independent seeds among 0..{n + extra - 1}")
    for i in pick:
        if pool[i].tail_relative > TAIL_LIMIT:
            raise InsufficientTruncation(f"tail {pool[i].tail_relative:.3g} for seed {pool[i].j}", result=pool[i])
    return [pool[i] for i in pick], _checked(_sub_gram(big, pick)), True


def wp_volume_density(gram) -> float:
    """det of the Gram matrix; 1 for an orthonormal family."""
    M = np.asarray(gram.matrix if isinstance(gram, WPGram) else gram, dtype=complex)
    H = 0.5 * (M + M.conj().T)
    ev = np.linalg.eigvalsh(H)
    err = gram.quadrature_error if isinstance(gram, WPGram) else 0.0
    noise = max(10.0 * err, 1e-12 * float(np.abs(ev).max(initial=0.0)))
    if ev.min() <= noise:
        raise DegenerateBasis(f"smallest Gram eigenvalue {ev.min():.3g} is not above noise")
    return float(np.real(np.linalg.det(M)))
