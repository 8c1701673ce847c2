"""Triangle-mesh surfaces, the cotangent Laplacian and what can be checked on it.

Meshes are intrinsic: each triangle carries its three edge lengths, so flat
tori and the identified octagon need no embedding. ``cycles`` stores a
symplectic homology basis (a1, b1, ..., ag, bg) as closed edge paths.
"""

from __future__ import annotations

import cmath
import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import quad

from .errors import (
    FitFailure,
    HomologyRankFailure,
    IncompleteSpectrum,
    InvalidModulus,
    InvalidParameter,
    SolverFailure,
    StarOperatorInconsistency,
    ValidationError,
)

ZERO_REL = 1e-10


@dataclass(frozen=True)
class MeshSurface:
    """Closed oriented triangle mesh with an intrinsic flat metric per triangle.

    ``lengths[f]`` are the lengths of edges (t0,t1), (t1,t2), (t2,t0) of
    triangle ``triangles[f] = (t0, t1, t2)``.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    lengths: np.ndarray
    cycles: Tuple[Tuple[Tuple[int, int], ...], ...] = ()
    meta: dict = field(default_factory=dict)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.triangles)

    @property
    def edges(self) -> np.ndarray:
        return _edge_table(self)[0]

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - len(self.edges) + self.n_faces

    @property
    def genus(self) -> int:
        chi = self.euler_characteristic
        if chi % 2 or chi > 2:
            raise ValidationError(f"Euler characteristic {chi} is not that of a closed orientable surface")
        return (2 - chi) // 2

    @property
    def triangle_areas(self) -> np.ndarray:
        a, b, c = self.lengths.T
        s = 0.5 * (a + b + c)
        return np.sqrt(np.maximum(s * (s - a) * (s - b) * (s - c), 0.0))

    @property
    def area(self) -> float:
        return float(self.triangle_areas.sum())

    def validate(self) -> "MeshSurface":
        """Every edge in exactly two triangles, traversed in opposite directions."""
        seen: Dict[Tuple[int, int], int] = {}
        for t in self.triangles:
            for k in range(3):
                u, v = int(t[k]), int(t[(k + 1) % 3])
                if u == v:
                    raise ValidationError("degenerate triangle")
                seen[(u, v)] = seen.get((u, v), 0) + 1
        for (u, v), cnt in seen.items():
            if cnt != 1 or seen.get((v, u)) != 1:
                raise ValidationError(f"edge ({u},{v}) is not a consistently oriented manifold edge")
        a, b, c = self.lengths.T
        if np.any(a + b <= c) or np.any(b + c <= a) or np.any(c + a <= b):
            raise ValidationError("triangle inequality fails")
        self.genus
        return self


def _edge_table(M: MeshSurface):
    cache = M.meta.setdefault("_edges", None) if isinstance(M.meta, dict) else None
    if cache is not None:
        return cache
    T = M.triangles
    pairs = np.concatenate([T[:, [0, 1]], T[:, [1, 2]], T[:, [2, 0]]])
    key = np.sort(pairs, axis=1)
    edges, inv = np.unique(key, axis=0, return_inverse=True)
    inv = inv.ravel()
    F = len(T)
    # edge id and orientation sign for each (triangle, local edge)
    eid = inv.reshape(3, F).T
    sign = np.where(pairs[:, 0] == key[:, 0], 1, -1).reshape(3, F).T
    M.meta["_edges"] = (edges, eid, sign)
    return M.meta["_edges"]


# ------------------------------------------------------------------ builders


def build_torus_mesh(tau: complex, n: int, unit_area: bool = True) -> MeshSurface:
    """Flat torus C / (Z + tau Z) on an n x n grid of parallelograms, each split in two.

    The diagonal runs along 1 + tau. With ``unit_area`` the lattice is scaled
    by 1/sqrt(Im tau).
    """
    tau = complex(tau)
    if not tau.imag > 0:
        raise InvalidModulus(f"Im tau = {tau.imag} must be positive")
    if n < 8:
        raise InvalidParameter("n must be >= 8")
    s = 1.0 / math.sqrt(tau.imag) if unit_area else 1.0
    e1, e2 = s / n, s * tau / n
    idx = lambda i, j: (i % n) * n + (j % n)
    verts = np.array([[(i * e1 + j * e2).real, (i * e1 + j * e2).imag, 0.0] for i in range(n) for j in range(n)])
    tris, lens = [], []
    l1, l2, l3 = abs(e1), abs(e2), abs(e1 + e2)
    for i in range(n):
        for j in range(n):
            a, b, c, d = idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)
            tris.append((a, b, c))
            lens.append((l1, l2, l3))
            tris.append((a, c, d))
            lens.append((l3, l1, l2))
    a_cycle = tuple((idx(i, 0), idx(i + 1, 0)) for i in range(n))
    b_cycle = tuple((idx(0, j), idx(0, j + 1)) for j in range(n))
    meta = {"kind": "torus", "tau": [tau.real, tau.imag], "n": n, "scale": s,
            "stencil": _torus_stencil(e1, e2)}
    return MeshSurface(verts, np.array(tris), np.array(lens), (a_cycle, b_cycle), meta).validate()


def _torus_stencil(e1: complex, e2: complex) -> dict:
    """Cotangent weights along lattice steps e1, e2, e1 + e2 and the vertex area."""

    def opp(p: complex, q: complex, r: complex) -> float:
        # cot of the angle at r in triangle (p, q, r)
        u, v = p - r, q - r
        return (u.real * v.real + u.imag * v.imag) / abs(u.real * v.imag - u.imag * v.real)

    z0, z1, z2, z3 = 0j, e1, e1 + e2, e2
    # edge 0 -> e1 sits in (0, e1, e1+e2) and in the translate (-e2, e1, 0)
    w1 = 0.5 * (opp(z0, z1, z2) + opp(z0, z1, -e2))
    # edge 0 -> e2 sits in (0, e1+e2, e2) and in the translate (-e1, 0, e2)
    w2 = 0.5 * (opp(z0, z3, z2) + opp(z0, z3, -e1))
    # diagonal 0 -> e1+e2, opposite vertices e1 and e2
    w3 = 0.5 * (opp(z0, z2, z1) + opp(z0, z2, z3))
    area = abs((e1.conjugate() * e2).imag)
    return {"w": [w1, w2, w3], "steps": [[1, 0], [0, 1], [1, 1]], "vertex_area": area}


def build_genus2_mesh(refinement: int = 1) -> MeshSurface:
    """Regular Euclidean octagon with sides glued by a1 b1 a1^-1 b1^-1 a2 b2 a2^-1 b2^-1.

    Each fan triangle (center, corner k, corner k+1) is cut into m^2 pieces
    with m = 3 * refinement (m >= 3 keeps the glued complex simplicial). All
    eight corners become one vertex.
    """
    if refinement < 1:
        raise InvalidParameter("refinement must be >= 1")
    m = 3 * refinement
    corners = [cmath.exp(1j * (math.pi / 8 + k * math.pi / 4)) for k in range(8)]
    pos: List[complex] = []
    key_to_id: Dict[Tuple, int] = {}

    def vid(key, z):
        if key not in key_to_id:
            key_to_id[key] = len(pos)
            pos.append(z)
        return key_to_id[key]

    # side k runs corner k -> corner k+1; pattern a b a^-1 b^-1 pairs side k with k+2 reversed
    partner = {0: 2, 1: 3, 4: 6, 5: 7}

    def side_key(k: int, t: int):
        """Key of the point t/m along side k (corner k -> k+1)."""
        if t == 0 or t == m:
            return ("corner",)
        if k in partner:
            return ("side", k, t)
        base = [a for a, b in partner.items() if b == k][0]
        return ("side", base, m - t)

    def point_key(k: int, i: int, j: int):
        # barycentric grid in fan triangle k: center + (i/m)(c_k - center) + (j/m)(c_{k+1} - center)
        if i + j == m:
            return side_key(k, j)
        if j == 0:
            return ("spoke", k, i) if i > 0 else ("center",)
        if i == 0:
            return ("spoke", (k + 1) % 8, j)
        return ("in", k, i, j)

    tris = []
    for k in range(8):
        c0, c1 = corners[k], corners[(k + 1) % 8]
        P = lambda i, j: (i / m) * c0 + (j / m) * c1
        V = lambda i, j: vid(point_key(k, i, j), P(i, j))
        for i in range(m):
            for j in range(m - i):
                tris.append(((V(i, j), V(i + 1, j), V(i, j + 1)), (P(i, j), P(i + 1, j), P(i, j + 1))))
                if i + j < m - 1:
                    tris.append(((V(i + 1, j), V(i + 1, j + 1), V(i, j + 1)), (P(i + 1, j), P(i + 1, j + 1), P(i, j + 1))))
    T, Lz = [], []
    for ids, zs in tris:
        T.append(ids)
        Lz.append((abs(zs[1] - zs[0]), abs(zs[2] - zs[1]), abs(zs[0] - zs[2])))
    T = np.array(T)
    # fan triangles are oriented center, corner k, corner k+1: counterclockwise
    cycles = []
    for k in (0, 1, 4, 5):
        path = []
        for t in range(m):
            u = key_to_id[side_key(k, t)]
            v = key_to_id[side_key(k, t + 1)]
            path.append((u, v))
        cycles.append(tuple(path))
    verts = np.array([[z.real, z.imag, 0.0] for z in pos])
    meta = {"kind": "genus2-octagon", "refinement": refinement, "m": m}
    return MeshSurface(verts, T, np.array(Lz), tuple(cycles), meta).validate()


# ------------------------------------------------------------------ OFF files


def write_off(M: MeshSurface, path) -> None:
    """OFF with three edge lengths appended to each face line, then cycle lines."""
    lines = ["OFF", f"{M.n_vertices} {M.n_faces} {len(M.edges)}"]
    for v in M.vertices:
        lines.append(" ".join(repr(float(x)) for x in v))
    for t, l in zip(M.triangles, M.lengths):
        lines.append("3 " + " ".join(str(int(i)) for i in t) + " " + " ".join(repr(float(x)) for x in l))
    for c in M.cycles:
        lines.append("# cycle " + " ".join(f"{u}:{v}" for u, v in c))
    lines.append("# meta " + json.dumps({k: v for k, v in M.meta.items() if not k.startswith("_")}, sort_keys=True))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_off(path) -> MeshSurface:
    with open(path) as fh:
        raw = [ln.strip() for ln in fh if ln.strip()]
    body = [ln for ln in raw if not ln.startswith("#")]
    if body[0] != "OFF":
        raise ValidationError("missing OFF header")
    nv, nf, _ = map(int, body[1].split())
    verts = np.array([[float(x) for x in body[2 + i].split()] for i in range(nv)])
    tris, lens = [], []
    for ln in body[2 + nv:2 + nv + nf]:
        parts = ln.split()
        if int(parts[0]) != 3:
            raise ValidationError("only triangles are supported")
        idx = [int(p) for p in parts[1:4]]
        tris.append(idx)
        if len(parts) >= 7:
            lens.append([float(p) for p in parts[4:7]])
        else:
            p = verts[idx]
            lens.append([np.linalg.norm(p[1] - p[0]), np.linalg.norm(p[2] - p[1]), np.linalg.norm(p[0] - p[2])])
    cycles, meta = [], {}
    for ln in raw:
        if ln.startswith("# cycle"):
            cycles.append(tuple(tuple(int(x) for x in tok.split(":")) for tok in ln.split()[2:]))
        elif ln.startswith("# meta"):
            meta = json.loads(ln[len("# meta"):])
    return MeshSurface(verts, np.array(tris, dtype=int), np.array(lens), tuple(cycles), meta).validate()


# ------------------------------------------------------------------ operators


def _cotangents(M: MeshSurface) -> np.ndarray:
    """cot of the angle opposite each local edge (k -> k+1) of every triangle."""
    a, b, c = M.lengths.T  # a=(0,1), b=(1,2), c=(2,0)
    area = M.triangle_areas
    # angle opposite edge of length x: cot = (y^2 + z^2 - x^2) / (4 area)
    return np.column_stack([(b * b + c * c - a * a), (c * c + a * a - b * b), (a * a + b * b - c * c)]) / (4.0 * area[:, None])


def edge_weights(M: MeshSurface) -> np.ndarray:
    """Diagonal Hodge star on 1-forms: (cot alpha + cot beta) / 2 per edge."""
    edges, eid, _ = _edge_table(M)
    w = np.zeros(len(edges))
    np.add.at(w, eid.ravel(), 0.5 * _cotangents(M).ravel())
    return w


def vertex_areas(M: MeshSurface) -> np.ndarray:
    """Lumped (barycentric) mass: a third of each incident triangle."""
    m = np.zeros(M.n_vertices)
    np.add.at(m, M.triangles.ravel(), np.repeat(M.triangle_areas / 3.0, 3))
    return m


def d0(M: MeshSurface) -> sp.csr_matrix:
    """Coboundary from vertices to edges: (d0 f)(u,v) = f(v) - f(u), edges stored with u < v."""
    edges = M.edges
    E = len(edges)
    rows = np.repeat(np.arange(E), 2)
    cols = edges.ravel()
    vals = np.tile([-1.0, 1.0], E)
    return sp.csr_matrix((vals, (rows, cols)), shape=(E, M.n_vertices))


def d1(M: MeshSurface) -> sp.csr_matrix:
    """Coboundary from edges to oriented triangles."""
    _, eid, sign = _edge_table(M)
    F = M.n_faces
    return sp.csr_matrix((sign.ravel().astype(float), (np.repeat(np.arange(F), 3), eid.ravel())),
                         shape=(F, len(M.edges)))


def cotan_laplacian(M: MeshSurface) -> Tuple[sp.csr_matrix, np.ndarray]:
    """Stiffness L = d0^T W d0 (positive semidefinite) and lumped mass; -Delta ~ M^-1 L."""
    D = d0(M)
    L = (D.T @ sp.diags(edge_weights(M)) @ D).tocsr()
    return L, vertex_areas(M)


def dirichlet_energy(M: MeshSurface, f: np.ndarray) -> float:
    """Edge sum of w_e (f(v) - f(u))^2."""
    e = M.edges
    w = edge_weights(M)
    return float(np.sum(w * (f[e[:, 1]] - f[e[:, 0]]) ** 2))


@dataclass(frozen=True)
class MeshSpectrum:
    eigenvalues: np.ndarray
    zero_mode_count: int
    n_total: int
    operator: str = "scalar-laplacian"
    residual: float = 0.0

    @property
    def complete(self) -> bool:
        return len(self.eigenvalues) == self.n_total

    def to_json(self) -> str:
        return json.dumps({"operator": self.operator, "eigenvalues": [float(x) for x in self.eigenvalues],
                           "zero_mode_count": self.zero_mode_count, "n_total": self.n_total,
                           "residual": self.residual}, indent=1, sort_keys=True)


def _count_zero(ev: np.ndarray, scale: float) -> int:
    return int(np.sum(np.abs(ev) <= ZERO_REL * scale))


def scalar_laplacian_spectrum(M: MeshSurface, k: Optional[int] = None) -> MeshSpectrum:
    """Lowest k eigenvalues (all when k is None) of L f = lambda M f."""
    L, mass = cotan_laplacian(M)
    n = M.n_vertices
    s = 1.0 / np.sqrt(mass)
    A = sp.diags(s) @ L @ sp.diags(s)
    if k is None or k >= n - 1:
        try:
            ev = sla.eigvalsh(A.toarray())
        except sla.LinAlgError as exc:
            raise SolverFailure(f"dense eigensolver failed: {exc}") from exc
        res = 0.0
        lam_max = float(ev[-1])
    else:
        try:
            ev, vec = spla.eigsh(A.tocsc(), k=k, sigma=-1e-3 * _gershgorin(A), which="LM")
        except (spla.ArpackNoConvergence, RuntimeError) as exc:
            raise SolverFailure(f"eigensolver did not converge: {exc}") from exc
        order = np.argsort(ev)
        ev, vec = ev[order], vec[:, order]
        res = float(np.abs(A @ vec - vec * ev).max())
        lam_max = _gershgorin(A)
        if res > 1e-6 * lam_max:
            raise SolverFailure(f"residual {res:.3g} too large", residual=res)
    ev = np.sort(ev)
    return MeshSpectrum(ev, _count_zero(ev, lam_max), n, "scalar-laplacian", res)


def _gershgorin(A: sp.spmatrix) -> float:
    return float(np.abs(A).sum(axis=1).max())


def log_zeta_det(spec: MeshSpectrum) -> float:
    if not spec.complete:
        raise IncompleteSpectrum(f"have {len(spec.eigenvalues)} of {spec.n_total} eigenvalues")
    ev = np.sort(np.asarray(spec.eigenvalues, float))
    lam_max = float(np.abs(ev).max(initial=0.0))
    nz = ev[np.abs(ev) > ZERO_REL * lam_max]
    return float(np.sum(np.log(nz)))


def zeta_det(spec: MeshSpectrum) -> float:
    """det' = product of the nonzero eigenvalues."""
    return math.exp(log_zeta_det(spec))


def spectrum_from_values(values: Sequence[float]) -> MeshSpectrum:
    ev = np.sort(np.asarray(values, float))
    return MeshSpectrum(ev, _count_zero(ev, float(np.abs(ev).max(initial=0.0))), len(ev), "given")


# ------------------------------------------------------------------ torus oracle


def dedekind_eta(tau: complex, method: str = "q-series", tol: float = 1e-12) -> complex:
    """eta(tau) = q^(1/24) prod (1 - q^n), q = exp(2 pi i tau).

    ``q-series`` uses Euler's pentagonal series sum (-1)^k q^(k(3k-1)/2);
    ``product`` multiplies the factors directly. Both stop below ``tol``.
    """
    tau = complex(tau)
    if not tau.imag > 0:
        raise InvalidModulus("Im tau must be positive")
    q = cmath.exp(2j * math.pi * tau)
    pre = cmath.exp(2j * math.pi * tau / 24.0)
    if method == "product":
        p = 1.0 + 0j
        n = 1
        while True:
            t = q ** n
            p *= 1.0 - t
            if abs(t) < tol * 1e-4:
                break
            n += 1
        return pre * p
    if method != "q-series":
        raise InvalidParameter(f"unknown method {method}")
    total = 1.0 + 0j
    k = 1
    while True:
        t1 = q ** (k * (3 * k - 1) // 2)
        t2 = q ** (k * (3 * k + 1) // 2)
        total += (-1) ** k * (t1 + t2)
        if abs(t1) < tol * 1e-4:
            break
        k += 1
    return pre * total


def continuum_torus_det(tau: complex, unit_area: bool = True, method: str = "q-series") -> float:
    """Zeta-regularized det' of the flat Laplacian on C/(Z + tau Z).

    With the lattice as given (area Im tau) the value is (Im tau)^2 |eta|^4;
    rescaled to unit area it is (Im tau) |eta|^4, which is modular invariant.
    The universal multiplicative constant of the regularization is dropped.
    """
    tau = complex(tau)
    if not tau.imag > 0:
        raise InvalidModulus("Im tau must be positive")
    e4 = abs(dedekind_eta(tau, method)) ** 4
    return tau.imag * e4 if unit_area else tau.imag ** 2 * e4


def bulk_log_density(M: MeshSurface) -> float:
    """Per-vertex mean of log of the symbol of M^-1 L for a lattice-periodic torus mesh.

    sigma(theta) = (1/A) sum_d w_d 2 (1 - cos(theta . s_d)); the inner integral
    over one angle is done in closed form via
    (1/2pi) int log(P - R cos x) dx = log((P + sqrt(P^2 - R^2)) / 2).
    """
    st = M.meta.get("stencil")
    if st is None:
        raise ValidationError("bulk density needs a lattice torus mesh")
    w1, w2, w3 = st["w"]
    A = st["vertex_area"]

    def inner(t1: float) -> float:
        # sigma*A = 2 w1 (1 - cos t1) + 2 w2 (1 - cos t2) + 2 w3 (1 - cos(t1 + t2))
        c = 2 * w2 + 2 * w3 * cmath.exp(1j * t1)
        P = 2 * w1 * (1 - math.cos(t1)) + 2 * w2 + 2 * w3
        R = abs(c)
        return math.log((P + math.sqrt(max(P * P - R * R, 0.0))) / 2.0)

    val = quad(inner, 0.0, 2 * math.pi, limit=400, epsabs=1e-12, epsrel=1e-12, points=[math.pi])[0] / (2 * math.pi)
    return val - math.log(A)


def torus_det_ratio(M1: MeshSurface, M2: MeshSurface, spec1: Optional[MeshSpectrum] = None,
                    spec2: Optional[MeshSpectrum] = None) -> dict:
    """Discrete vs continuum log det' ratio for two unit-area lattice tori of equal vertex count.

    The raw discrete ratio contains N times the difference of the per-vertex
    bulk terms of the two stencils; ``corrected`` removes it.
    """
    if M1.n_vertices != M2.n_vertices:
        raise InvalidParameter("compare tori with equal vertex counts")
    s1 = spec1 or scalar_laplacian_spectrum(M1)
    s2 = spec2 or scalar_laplacian_spectrum(M2)
    N = M1.n_vertices
    raw = log_zeta_det(s1) - log_zeta_det(s2)
    bulk = N * (bulk_log_density(M1) - bulk_log_density(M2))
    t1, t2 = (complex(*M.meta["tau"]) for M in (M1, M2))
    cont = math.log(continuum_torus_det(t1)) - math.log(continuum_torus_det(t2))
    corrected = raw - bulk
    return {"log_ratio_raw": raw, "bulk": bulk, "log_ratio": corrected, "log_ratio_continuum": cont,
            "ratio": math.exp(corrected), "ratio_continuum": math.exp(cont),
            "relative_error": abs(math.exp(corrected - cont) - 1.0)}


# ------------------------------------------------------------------ heat trace


def heat_trace_zeta0(spec: MeshSpectrum, area: float, window: Optional[Tuple[float, float]] = None,
                     samples: int = 40) -> dict:
    """Fit sum exp(-lambda t) - area/(4 pi t) = a0 + c / t^2 and return zeta(0) = a0 - zero modes.

    The c / t^2 term absorbs the leading lattice correction. The default window
    is [20 h^2, 0.03 area] with h^2 = area / N.
    """
    ev = np.asarray(spec.eigenvalues, float)
    if not spec.complete:
        raise IncompleteSpectrum("heat trace needs the full spectrum")
    N = len(ev)
    lo, hi = window if window is not None else (20.0 * area / N, 0.03 * area)
    if not 0 < lo < hi:
        raise FitFailure(f"empty fit window [{lo}, {hi}]")
    t = np.linspace(lo, hi, samples)
    trace = np.exp(-np.outer(t, np.maximum(ev, 0.0))).sum(axis=1)
    y = trace - area / (4 * math.pi * t)
    X = np.column_stack([np.ones_like(t), 1.0 / t ** 2])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = float(np.sqrt(np.mean((X @ coef - y) ** 2)))
    if resid > 1e-2:
        raise FitFailure(f"heat-trace fit residual {resid:.3g}", residual=resid)
    zero = spec.zero_mode_count
    return {"a0": float(coef[0]), "c": float(coef[1]), "zeta0": float(coef[0] - zero), "residual": resid,
            "window": [lo, hi], "zero_modes": zero}


def scaling_invariance_check(M: MeshSurface, c: float, spec: Optional[MeshSpectrum] = None,
                             zeta0: float = -1.0) -> dict:
    """det'/Area under g -> c g: continuum rule and the discrete zeta(0) fit.

    Eigenvalues scale by 1/c, so det' scales by c^(-zeta(0)) and the area by c;
    with zeta(0) = -1 the quotient is unchanged.
    """
    if not c > 0:
        raise InvalidParameter("scale factor must be positive")
    det_factor = c ** (-zeta0)
    area_factor = c
    out = {"c": c, "det_factor": det_factor, "area_factor": area_factor, "ratio": det_factor / area_factor}
    if spec is not None or M.meta.get("kind") == "torus":
        s = spec or scalar_laplacian_spectrum(M)
        fit = heat_trace_zeta0(s, M.area)
        out["fit"] = fit
        out["ratio_fitted"] = c ** (-fit["zeta0"]) / c
        out["zeta0_within_5pct"] = abs(fit["zeta0"] - zeta0) <= 0.05 * abs(zeta0)
    return out


# ------------------------------------------------------------------ Gaussian integrals


@dataclass(frozen=True)
class GaussianModel:
    """Eigenvalues of a positive quadratic form; ``area`` set means the zero mode is area-regularized."""

    eigenvalues: Tuple[float, ...]
    area: Optional[float] = None

    def closed_form(self) -> float:
        """int exp(-sum lambda y^2) dy = prod sqrt(pi / lambda)."""
        return float(np.prod(np.sqrt(math.pi / np.asarray(self.eigenvalues, float))))

    def reduced_form(self) -> float:
        """prod lambda^(-1/2) with the sqrt(pi) factors dropped, times area^(1/2) when regularized."""
        v = float(np.prod(np.asarray(self.eigenvalues, float) ** -0.5))
        return v * math.sqrt(self.area) if self.area is not None else v


def gaussian_reduction_check(gm: GaussianModel, samples: int = 100_000, seed: int = 0) -> dict:
    """Importance-sampled Monte Carlo of the Gaussian integral against its closed form.

    Coordinate k is drawn from N(0, 1/lambda_k), twice the spread of the
    integrand, from a Philox stream keyed by ``seed``. The weights are then
    bounded with relative variance (2/sqrt 3)^d - 1.
    """
    lam = np.asarray(gm.eigenvalues, float)
    if lam.size == 0 or lam.size > 12 or np.any(lam <= 0):
        raise InvalidParameter("need 1..12 positive eigenvalues")
    rng = np.random.Generator(np.random.Philox(seed))
    var = 1.0 / lam
    y = rng.normal(size=(samples, lam.size)) * np.sqrt(var)
    log_q = -0.5 * np.sum(y * y / var, axis=1) - 0.5 * np.sum(np.log(2 * math.pi * var))
    wts = np.exp(-np.sum(lam * y * y, axis=1) - log_q)
    est = float(wts.mean())
    se = float(wts.std(ddof=1) / math.sqrt(samples))
    exact = gm.closed_form()
    return {"estimate": est, "standard_error": se, "closed_form": exact,
            "z_score": (est - exact) / se if se > 0 else 0.0,
            "reduced_form": gm.reduced_form(), "seed": seed, "samples": samples,
            "dimension": int(lam.size)}


# ------------------------------------------------------------------ harmonic forms


@dataclass(frozen=True)
class HarmonicOneFormBasis:
    """Harmonic 1-cochains dual to the stored cycles: int_{cycle_c} forms[a] = delta_ca.

    ``wedge[a, b]`` = int forms[a] ^ forms[b]; ``inner[a, b]`` the L2 product
    with the diagonal star; ``star`` expresses the Hodge star in this basis.
    """

    mesh: MeshSurface
    forms: np.ndarray
    inner: np.ndarray
    wedge: np.ndarray
    star: np.ndarray
    closed_residual: float
    coclosed_residual: float

    @property
    def dimension(self) -> int:
        return len(self.forms)


def cycle_integral(M: MeshSurface, form: np.ndarray, cycle: Sequence[Tuple[int, int]]) -> float:
    edges = M.edges
    index = {(int(u), int(v)): k for k, (u, v) in enumerate(edges)}
    total = 0.0
    for u, v in cycle:
        k = index.get((u, v))
        total += form[k] if k is not None else -form[index[(v, u)]]
    return float(total)


def wedge_pairing(M: MeshSurface, a: np.ndarray, b: np.ndarray) -> float:
    """int a ^ b via the antisymmetrized cup product on each oriented triangle."""
    _, eid, sign = _edge_table(M)
    A = a[eid] * sign  # values on (t0->t1, t1->t2, t2->t0)
    B = b[eid] * sign
    s = 0.0
    for k in range(3):
        j = (k + 1) % 3
        s += np.sum(A[:, k] * B[:, j] - A[:, j] * B[:, k])
    return float(s / 6.0)


def _closed_generators(M: MeshSurface) -> List[np.ndarray]:
    """Closed cochains, one per generator edge of a tree-cotree split."""
    edges, eid, sign = _edge_table(M)
    E, V, F = len(edges), M.n_vertices, M.n_faces
    adj: List[List[Tuple[int, int]]] = [[] for _ in range(V)]
    for k, (u, v) in enumerate(edges):
        adj[u].append((v, k))
        adj[v].append((u, k))
    in_tree = np.zeros(E, bool)
    seen = np.zeros(V, bool)
    seen[0] = True
    dq = deque([0])
    while dq:
        u = dq.popleft()
        for v, k in adj[u]:
            if not seen[v]:
                seen[v] = True
                in_tree[k] = True
                dq.append(v)
    faces_of_edge: List[List[int]] = [[] for _ in range(E)]
    for f in range(F):
        for k in range(3):
            faces_of_edge[eid[f, k]].append(f)
    parent_edge = -np.ones(F, int)
    order = [0]
    fseen = np.zeros(F, bool)
    fseen[0] = True
    in_cotree = np.zeros(E, bool)
    dq = deque([0])
    while dq:
        f = dq.popleft()
        for k in range(3):
            e = eid[f, k]
            if in_tree[e]:
                continue
            for g in faces_of_edge[e]:
                if not fseen[g]:
                    fseen[g] = True
                    in_cotree[e] = True
                    parent_edge[g] = e
                    order.append(g)
                    dq.append(g)
    gens = np.nonzero(~in_tree & ~in_cotree)[0]
    out = []
    for gk in gens:
        z = np.zeros(E)
        z[gk] = 1.0
        # leaves first: each face fixes the value on the edge to its parent
        for f in reversed(order[1:]):
            e = parent_edge[f]
            k = int(np.nonzero(eid[f] == e)[0][0])
            others = sum(sign[f, j] * z[eid[f, j]] for j in range(3) if j != k)
            z[e] = -others * sign[f, k]
        out.append(z)
    return out


def harmonic_one_forms(M: MeshSurface, tol: float = 1e-8) -> HarmonicOneFormBasis:
    """2g harmonic cochains: closed generators minus their exact parts, dualized to the stored cycles."""
    g = M.genus
    if g < 1:
        raise HomologyRankFailure("a sphere has no harmonic 1-forms")
    if len(M.cycles) != 2 * g:
        raise HomologyRankFailure(f"mesh stores {len(M.cycles)} cycles, need {2 * g}")
    D0, D1 = d0(M), d1(M)
    w = edge_weights(M)
    L = (D0.T @ sp.diags(w) @ D0).tocsc()
    # pin vertex 0 to remove the constant kernel
    keep = np.arange(1, M.n_vertices)
    Lr = L[keep][:, keep].tocsc()
    solve = spla.factorized(Lr)
    raw = _closed_generators(M)
    if len(raw) != 2 * g:
        raise HomologyRankFailure(f"found {len(raw)} generators, expected {2 * g}")
    harm = []
    for z in raw:
        rhs = D0.T @ (w * z)
        f = np.zeros(M.n_vertices)
        f[keep] = solve(rhs[keep])
        harm.append(z - D0 @ f)
    H = np.array(harm)
    P = np.array([[cycle_integral(M, h, c) for h in H] for c in M.cycles])  # P[c, a]
    if abs(np.linalg.det(P)) < 1e-8:
        raise HomologyRankFailure("stored cycles do not span homology")
    H = np.linalg.solve(P.T, H)  # now int_{cycle_c} H[a] = delta
    closed = float(np.abs(D1 @ H.T).max())
    coclosed = float(np.abs(D0.T @ (w[:, None] * H.T)).max())
    scale = float(np.abs(H).max())
    if closed > tol * max(scale, 1.0) or coclosed > tol * max(scale, 1.0) * max(float(w.max()), 1.0):
        raise HomologyRankFailure(f"residuals closed={closed:.3g} coclosed={coclosed:.3g}")
    inner = (H * w) @ H.T
    wedge = np.array([[wedge_pairing(M, a, b) for b in H] for a in H])
    star = -np.linalg.solve(inner, wedge)
    return HarmonicOneFormBasis(M, H, inner, wedge, star, closed, coclosed)


def hodge_gram(B: HarmonicOneFormBasis, tol: float = 1e-6) -> np.ndarray:
    """g x g Gram (i/2) int omega_j ^ conj(omega_k) of holomorphic forms with unit a-periods.

    omega = h + i *h for harmonic h; in the a-normalized basis this is the
    imaginary part of the period matrix.
    """
    n = B.dimension
    g = n // 2
    S = B.star
    a_idx = [2 * j for j in range(g)]
    X = np.zeros((n, g), complex)
    for col, a in enumerate(a_idx):
        X[a, col] = 1.0
        X[:, col] += 1j * S[:, a]
    X = X @ np.linalg.inv(X[a_idx, :])
    G = 0.5j * X.T @ B.wedge @ X.conj()
    herm = float(np.abs(G - G.conj().T).max())
    ev = np.linalg.eigvalsh(0.5 * (G + G.conj().T))
    if ev.min() <= -tol or herm > tol * max(1.0, float(np.abs(G).max())):
        raise StarOperatorInconsistency("Hodge Gram is not hermitian positive definite",
                                        eigenvalues=ev.tolist(), hermitian_defect=herm)
    return G


def star_defect(B: HarmonicOneFormBasis) -> float:
    """max |(*)^2 + 1| on the harmonic basis; zero in the continuum, O(h) near cone points."""
    n = B.dimension
    return float(np.abs(B.star @ B.star + np.eye(n)).max())
