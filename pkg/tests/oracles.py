"""Independent reference computations used by the test-suite.

None of these call into the package's own enumeration, census or
determinant code; they only take group matrices or raw parameters.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import product

import mpmath as mp
import numpy as np


# ----------------------------------------------------------- Bolza systole


def _reduced_words_matrices(mats, max_len):
    """Yield (length, matrices) level by level for all freely reduced words."""
    letters = list(mats) + [np.linalg.inv(m) for m in mats]
    k = len(mats)
    L = np.stack(letters)
    inv_of = np.array([(i + k) % (2 * k) for i in range(2 * k)])
    cur = L.copy()
    last = np.arange(2 * k)
    yield 1, cur
    for n in range(2, max_len + 1):
        outs, lasts = [], []
        for j in range(2 * k):
            keep = last != inv_of[j]
            outs.append(cur[keep] @ L[j])
            lasts.append(np.full(int(keep.sum()), j))
        cur, last = np.concatenate(outs), np.concatenate(lasts)
        yield n, cur


def _dirichlet_neighbours(mats, depth=3):
    """Images of i under all words up to ``depth`` (a superset of the side pairings)."""
    pts = []
    for _, m in _reduced_words_matrices(mats, depth):
        z = (m[:, 0, 0] * 1j + m[:, 0, 1]) / (m[:, 1, 0] * 1j + m[:, 1, 1])
        pts.append(z)
    pts = np.concatenate(pts)
    return pts[np.abs(pts - 1j) > 1e-9]


def _axis_chord_in_domain(m, neighbours):
    """Hyperbolic length of the axis of m inside the Dirichlet polygon at i."""
    # columns are the two fixed points in homogeneous coordinates, so M maps
    # the imaginary axis onto the axis of m (fixed points at infinity included)
    _, vecs = np.linalg.eig(m)
    M = np.real(vecs)
    if np.linalg.det(M) < 0:
        M[:, 1] = -M[:, 1]
    Mi = np.linalg.inv(M)

    def pull(z):
        return (Mi[0, 0] * z + Mi[0, 1]) / (Mi[1, 0] * z + Mi[1, 1])

    p0 = pull(1j)
    ps = pull(neighbours)
    # d(w, p0) <= d(w, p) along w = i u, written in U = u^2 as A U <= B
    A = 1.0 / p0.imag - 1.0 / ps.imag
    B = np.abs(ps) ** 2 / ps.imag - abs(p0) ** 2 / p0.imag
    lo, hi, weight = 0.0, math.inf, 1.0
    for ai, bi in zip(A, B):
        if abs(ai) < 1e-9:
            if bi < -1e-9:
                return 0.0
            if bi < 1e-9:
                # the axis runs inside a bisector, i.e. along a side shared with the neighbouring copy
                weight = 0.5
        elif ai > 0:
            hi = min(hi, bi / ai)
        else:
            lo = max(lo, bi / ai)
    if not (hi > lo > 0):
        return 0.0
    return weight * 0.5 * math.log(hi / lo)


def bolza_systole_oracle(mats, max_len=8, trace_tol=1e-7):
    """(systole, oriented class count) from words of length <= max_len.

    Every oriented primitive class of length l has lifts whose pieces inside
    the Dirichlet polygon add up to exactly l, so the class count is the
    total chord length of all systolic axes divided by l.
    """
    target = 2.0 + 2.0 * math.sqrt(2.0)
    mats = [np.asarray(m, float) for m in mats]
    found = []
    tmin = math.inf
    for _, M in _reduced_words_matrices(mats, max_len):
        tr = np.abs(M[:, 0, 0] + M[:, 1, 1])
        tmin = min(tmin, float(tr[tr > 2.0 + 1e-9].min(initial=math.inf)))
        hit = M[np.abs(tr - target) < trace_tol]
        if len(hit):
            found.append(hit)
    if abs(tmin - target) > trace_tol:
        raise AssertionError(f"shortest trace {tmin} is not the expected systolic trace")
    found = np.concatenate(found)
    # identify +-M
    sgn = np.sign(found[:, 0, 0] + found[:, 1, 1])[:, None, None]
    keys = np.round(found * sgn, 7).reshape(len(found), 4)
    _, idx = np.unique(keys, axis=0, return_index=True)
    uniq = found[idx] * sgn[idx]
    nb = _dirichlet_neighbours(mats)
    ell = 2.0 * math.acosh(target / 2.0)
    total = sum(_axis_chord_in_domain(m, nb) for m in uniq)
    return ell, total / ell


# ----------------------------------------------------------- covers


def z2_homomorphism_count(genus):
    """Nonzero homomorphisms pi_1 -> Z/2, by brute force over generator images."""
    count = 0
    for img in product((0, 1), repeat=2 * genus):
        rel = 0
        for i in range(genus):
            a, b = img[2 * i], img[2 * i + 1]
            rel += a + b - a - b
        if rel % 2 == 0 and any(img):
            count += 1
    return count


def _irrep_dimensions(n):
    from sympy.utilities.iterables import partitions

    out = []
    for p in partitions(n):
        lam = sorted((k for k, v in p.items() for _ in range(v)), reverse=True)
        conj = [sum(1 for l in lam if l > j) for j in range(lam[0])]
        hooks = 1
        for i, l in enumerate(lam):
            for j in range(l):
                hooks *= (l - j - 1) + (conj[j] - i - 1) + 1
        out.append(math.factorial(n) // hooks)
    return out


def hall_subgroup_counts(N, genus):
    """Index-n subgroup counts a_1..a_N of the genus-g surface group.

    |Hom(pi_1, S_n)| / n! = sum over irreps of (n!/dim)^(2g-2) (Frobenius-Mednykh),
    then Hall's recursion a_n = n h_n - sum_k h_{n-k} a_k.
    """
    h = [Fraction(1)] + [sum(Fraction(math.factorial(n), d) ** (2 * genus - 2) for d in _irrep_dimensions(n))
                         for n in range(1, N + 1)]
    a = [Fraction(0)] * (N + 1)
    for n in range(1, N + 1):
        a[n] = n * h[n] - sum(h[n - k] * a[k] for k in range(1, n))
    return [int(x) for x in a[1:]]


# ----------------------------------------------------------- tori


def eta_mpmath(tau, dps=30):
    """eta(tau) = q^(1/24) (q; q)_inf through mpmath's q-Pochhammer symbol."""
    with mp.workdps(dps):
        t = mp.mpc(tau.real, tau.imag)
        q = mp.exp(2j * mp.pi * t)
        return complex(mp.exp(2j * mp.pi * t / 24) * mp.qp(q))


def torus_det_oracle(tau, unit_area=True):
    eta = eta_mpmath(tau)
    return tau.imag ** (1 if unit_area else 2) * abs(eta) ** 4


def lattice_torus_eigenvalues(tau, n, unit_area=True):
    """Exact spectrum of the cotangent Laplacian of the n x n lattice torus by Fourier analysis.

    Triangles are split along e1 + e2; the three edge classes carry the
    cotangent weights of their two opposite angles and every vertex the
    lumped area of two triangles.
    """
    s = 1.0 / math.sqrt(tau.imag) if unit_area else 1.0
    e1 = np.array([1.0, 0.0]) * s / n
    e2 = np.array([tau.real, tau.imag]) * s / n

    def cot(u, v):
        return float(np.dot(u, v) / abs(u[0] * v[1] - u[1] * v[0]))

    # triangle T1 = (0, e1, e1+e2), T2 = (0, e1+e2, e2)
    d = e1 + e2
    # each edge class: the angle opposite in the two triangles sharing it
    w = {
        (1, 0): 0.5 * (cot(-d, -e2) + cot(e2, d)),  # at d in T1 and at -e2 in T2 - e2
        (0, 1): 0.5 * (cot(-d, -e1) + cot(e1, d)),  # at d in T2 and at -e1 in T1 - e1
        (1, 1): 0.5 * (cot(-e1, e2) + cot(-e2, e1)),  # at e1 in T1 and at e2 in T2
    }
    area_tri = 0.5 * abs(e1[0] * e2[1] - e1[1] * e2[0])
    mass = 2.0 * area_tri
    k = np.arange(n)
    t1, t2 = np.meshgrid(2 * np.pi * k / n, 2 * np.pi * k / n, indexing="ij")
    lam = np.zeros_like(t1)
    for (i, j), wk in w.items():
        lam += 2.0 * wk * (1.0 - np.cos(i * t1 + j * t2))
    return np.sort(lam.ravel() / mass)
