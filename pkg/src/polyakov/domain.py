"""Orbit enumeration and Dirichlet fundamental domains.

Everything is normalized so the Dirichlet center sits at ``i``; the polygon
itself is stored in the Klein disk model, where geodesics are chords and the
domain is an ordinary convex polygon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import words as W
from .errors import IncompleteDomain, InvalidParameter
from .hyperbolic import FuchsianGroupModel, displacement_at_i, inverse_matrix, moving_to_i

AREA_RTOL = 1e-6


class ToleranceIndex:
    """Approximate-equality lookup for small float vectors.

    Vectors are bucketed by a fixed random projection on two staggered grids,
    so two vectors within ``tol`` always share a bucket on at least one grid;
    candidates are then compared coordinate-wise.
    """

    def __init__(self, dim: int, cell: float = 1e-4, tol: float = 1e-7, seed: int = 12345):
        rng = np.random.default_rng(seed)
        self._dir = rng.normal(size=dim)
        self._dir /= np.abs(self._dir).sum()
        self.cell = cell
        self.tol = tol
        self._grid: Tuple[Dict[int, List[int]], Dict[int, List[int]]] = ({}, {})
        self.vectors: List[np.ndarray] = []

    def _keys(self, v: np.ndarray) -> Tuple[int, int]:
        p = float(self._dir @ v) / self.cell
        return math.floor(p), math.floor(p + 0.5)

    def find(self, v: np.ndarray) -> int:
        for grid, key in zip(self._grid, self._keys(v)):
            for idx in grid.get(key, ()):
                if np.abs(self.vectors[idx] - v).max() <= self.tol * max(1.0, np.abs(v).max()):
                    return idx
        return -1

    def add(self, v: np.ndarray) -> int:
        idx = len(self.vectors)
        self.vectors.append(v)
        for grid, key in zip(self._grid, self._keys(v)):
            grid.setdefault(key, []).append(idx)
        return idx

    def find_or_add(self, v: np.ndarray) -> Tuple[int, bool]:
        idx = self.find(v)
        if idx >= 0:
            return idx, False
        return self.add(v), True

    def __len__(self):
        return len(self.vectors)


def _canon(m: np.ndarray) -> np.ndarray:
    """Sign representative in PSL2 (positive trace; torsion-free groups never have trace 0)."""
    return -m if m[0, 0] + m[1, 1] < 0 else m


@dataclass
class Ball:
    """Distinct group elements found by breadth-first search.

    ``words`` are in the letters of the group's own generators.
    ``complete`` is False when the word-length bound (or budget) stopped the
    search; ``cut_radius`` is then the smallest displacement among the
    children left unexplored (``inf`` for a complete search).
    """

    matrices: np.ndarray
    displacement: np.ndarray
    depth: np.ndarray
    parent: np.ndarray
    letter: np.ndarray
    letter_words: List[W.Word]
    max_depth: int
    complete: bool
    cut_radius: float = math.inf

    def __len__(self):
        return len(self.matrices)

    def word(self, idx: int) -> W.Word:
        parts: List[W.Word] = []
        while idx > 0:
            parts.append(self.letter_words[self.letter[idx]])
            idx = self.parent[idx]
        out: List[int] = []
        for p in reversed(parts):
            out.extend(p)
        return W.reduce(out)


def enumerate_ball(
    generators: Sequence[np.ndarray],
    generator_words: Sequence[W.Word],
    prune_radius: float,
    max_word_length: int,
    budget: Optional[int] = None,
) -> Ball:
    """All elements reachable by words whose every prefix moves ``i`` at most ``prune_radius``.

    ``generators`` act on the left-to-right word convention: the element of
    word ``x1 x2 ... xk`` is the matrix product in that order.
    """
    letters: List[np.ndarray] = []
    letter_words: List[W.Word] = []
    inverse_of: List[int] = []
    for k, (g, w) in enumerate(zip(generators, generator_words)):
        letters.extend([np.asarray(g, float), inverse_matrix(np.asarray(g, float))])
        letter_words.extend([tuple(w), W.inverse(w)])
        inverse_of.extend([2 * k + 1, 2 * k])
    L = np.array(letters)
    inv_of = np.array(inverse_of)

    index = ToleranceIndex(4)
    mats = [np.eye(2)]
    index.add(np.eye(2).ravel())
    disp = [0.0]
    depth = [0]
    parent = [-1]
    letter = [-1]
    frontier = np.array([0])
    level = 0
    complete = True
    cut_radius = math.inf
    while len(frontier):
        if level >= max_word_length or (budget is not None and len(mats) > budget):
            complete = False
            for start in range(0, len(frontier), 65536):
                base = np.array([mats[i] for i in frontier[start:start + 65536]])
                cand = np.einsum("fij,ljk->flik", base, L)
                d = displacement_at_i(cand)
                for fi, li in zip(*np.nonzero(d <= prune_radius)):
                    if d[fi, li] < cut_radius and index.find(_canon(cand[fi, li]).ravel()) < 0:
                        cut_radius = float(d[fi, li])
            complete = math.isinf(cut_radius)
            break
        level += 1
        base = np.array([mats[i] for i in frontier])
        cand = np.einsum("fij,ljk->flik", base, L)
        d = displacement_at_i(cand)
        new_frontier = []
        last_letter = np.array([letter[i] for i in frontier])
        for fi in range(len(frontier)):
            for li in range(len(L)):
                if last_letter[fi] >= 0 and inv_of[last_letter[fi]] == li:
                    continue
                if d[fi, li] > prune_radius:
                    continue
                m = _canon(cand[fi, li])
                idx, new = index.find_or_add(m.ravel())
                if not new:
                    continue
                mats.append(m)
                disp.append(float(d[fi, li]))
                depth.append(level)
                parent.append(int(frontier[fi]))
                letter.append(li)
                new_frontier.append(idx)
        frontier = np.array(new_frontier, dtype=int)
    return Ball(
        np.array(mats),
        np.array(disp),
        np.array(depth),
        np.array(parent),
        np.array(letter),
        letter_words,
        int(max(depth)),
        complete,
        cut_radius,
    )


# ------------------------------------------------------------ Klein model


def upper_to_klein(z) -> np.ndarray:
    """Upper half-plane -> Klein disk (i goes to the origin); returns (..., 2) array."""
    z = np.asarray(z, dtype=complex)
    u = (z - 1j) / (z + 1j)
    k = 2 * u / (1 + np.abs(u) ** 2)
    return np.stack([k.real, k.imag], axis=-1)


def klein_to_upper(k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    kc = k[..., 0] + 1j * k[..., 1]
    r2 = np.abs(kc) ** 2
    u = kc / (1 + np.sqrt(np.maximum(1 - r2, 0.0)))
    return 1j * (1 + u) / (1 - u)


def boundary_to_klein(x: float) -> np.ndarray:
    """Point of the real line (or inf) -> unit circle."""
    if math.isinf(x):
        return np.array([1.0, 0.0])
    u = (x - 1j) / (x + 1j)
    return np.array([u.real, u.imag])


def klein_cosh_dist(p: np.ndarray, q: np.ndarray) -> float:
    num = 1.0 - float(p @ q)
    den = math.sqrt(max(1.0 - float(p @ p), 1e-300) * max(1.0 - float(q @ q), 1e-300))
    return max(num / den, 1.0)


def _orbit_point(m: np.ndarray) -> np.ndarray:
    a, b, c, d = m.ravel()
    z = (a * 1j + b) / (c * 1j + d)
    return upper_to_klein(z)


def _clip(poly: np.ndarray, normal: np.ndarray, offset: float) -> np.ndarray:
    """Keep the part of a convex polygon with normal . x <= offset."""
    out = []
    n = len(poly)
    vals = poly @ normal - offset
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        vp, vq = vals[i], vals[(i + 1) % n]
        if vp <= 0:
            out.append(p)
        if (vp < 0 < vq) or (vq < 0 < vp):
            t = vp / (vp - vq)
            out.append(p + t * (q - p))
    return np.array(out) if out else np.zeros((0, 2))


def polygon_area(vertices: np.ndarray) -> float:
    """Hyperbolic area of a convex Klein polygon containing the origin.

    Fans from the origin; a Poincare-disk triangle (0, u, v) has area
    ``2 |arg(1 - conj(u) v)|``, which stays accurate for thin triangles.
    """
    k = np.asarray(vertices, float)
    u = (k[:, 0] + 1j * k[:, 1]) / (1.0 + np.sqrt(np.maximum(1.0 - np.sum(k * k, axis=1), 0.0)))
    v = np.roll(u, -1)
    return float(np.sum(2.0 * np.abs(np.angle(1.0 - np.conj(u) * v))))


@dataclass(frozen=True)
class DirichletDomain:
    """Dirichlet polygon of a group centred (after conjugation) at i.

    ``conjugator`` maps the requested center to i; ``group`` is the conjugated
    group the polygon belongs to. ``sides[k]`` is the side-pairing element
    whose bisector carries side k, with its word in the group's generators.
    """

    center: complex
    group: FuchsianGroupModel
    conjugator: np.ndarray
    vertices_klein: np.ndarray
    side_matrices: Tuple[np.ndarray, ...]
    side_words: Tuple[W.Word, ...]
    inradius: float
    outradius: float
    area: float
    word_cutoff: int
    meta: dict = field(default_factory=dict)

    @property
    def vertices(self) -> np.ndarray:
        """Vertices in the upper half-plane (of the conjugated group)."""
        return klein_to_upper(self.vertices_klein)

    @property
    def bounding_geodesics(self) -> List[Tuple[float, float]]:
        """Each side's supporting geodesic as a pair of real endpoints (upper half-plane)."""
        out = []
        for m in self.side_matrices:
            q = _orbit_point(m)
            nrm = float(np.hypot(*q))
            off = 1.0 - math.sqrt(max(1.0 - nrm * nrm, 0.0))
            # chord {x : q.x = off}
            n = q / nrm
            h = off / nrm
            t = math.sqrt(max(1.0 - h * h, 0.0))
            perp = np.array([-n[1], n[0]])
            ends = []
            for p in (h * n + t * perp, h * n - t * perp):
                u = complex(p[0], p[1])
                ends.append((1j * (1 + u) / (1 - u)).real if abs(1 - u) > 1e-15 else math.inf)
            out.append(tuple(ends))
        return out

    def contains_klein(self, k: np.ndarray, tol: float = 1e-12) -> bool:
        n = len(self.vertices_klein)
        for i in range(n):
            p, q = self.vertices_klein[i], self.vertices_klein[(i + 1) % n]
            e = q - p
            if e[0] * (k[1] - p[1]) - e[1] * (k[0] - p[0]) < -tol:
                return False
        return True


def _ccw(poly: np.ndarray) -> np.ndarray:
    x, y = poly[:, 0], poly[:, 1]
    signed = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    return poly if signed >= 0 else poly[::-1]


def dirichlet_domain(
    G: FuchsianGroupModel,
    center: complex = 1j,
    word_cutoff: int = 8,
    prune_radius: Optional[float] = None,
    generators: Optional[Sequence[np.ndarray]] = None,
    generator_words: Optional[Sequence[W.Word]] = None,
) -> DirichletDomain:
    """Dirichlet domain from the orbit elements of word length <= ``word_cutoff``.

    The polygon built from a subset of the orbit contains the true domain, so
    its area decreases toward 4 pi (g - 1) as the cutoff grows; a match within
    1e-6 relative certifies closure. Otherwise ``IncompleteDomain`` is raised
    with the area reached (``inf`` when the polygon is not compact).

    ``generators`` (with their ``generator_words`` in the letters of ``G``)
    replaces the search alphabet; a short generating set keeps the search
    ball small when the standard generators are long.
    """
    if word_cutoff < 1:
        raise InvalidParameter("word_cutoff must be >= 1")
    r = moving_to_i(complex(center))
    if abs(complex(center) - 1j) > 0:
        Gc = G.conjugate(r)
    else:
        Gc = G
        r = np.eye(2)
    if generators is None:
        gens = Gc.matrices()
        gen_words = [(k + 1,) for k in range(len(gens))]
    else:
        gens = [r @ np.asarray(g, float) @ inverse_matrix(r) for g in generators]
        gen_words = [tuple(w) for w in generator_words]
    target = Gc.area
    max_gen = float(max(displacement_at_i(np.array(gens))))
    if prune_radius is None:
        base = 2.0 * math.acosh(2.0 * Gc.genus - 1.0) + 1.0
    else:
        base = float(prune_radius)
    for _attempt in range(6):
        ball = enumerate_ball(gens, gen_words, base + max_gen, word_cutoff)
        dom = _polygon_from_ball(ball, base)
        if dom is None:
            if prune_radius is None and _attempt < 5:
                base += 1.5
                continue
            raise IncompleteDomain(
                f"polygon not compact at word cutoff {word_cutoff}", achieved_area=math.inf
            )
        verts, sides, area, inr, outr = dom
        if prune_radius is None and 2.0 * outr > base + 1e-9:
            base = 2.0 * outr + 0.25
            continue
        break
    if abs(area - target) > AREA_RTOL * target:
        raise IncompleteDomain(
            f"area {area:.9g} differs from {target:.9g} at word cutoff {word_cutoff}",
            achieved_area=area,
        )
    return DirichletDomain(
        complex(center),
        Gc,
        r,
        verts,
        tuple(ball.matrices[i] for i in sides),
        tuple(ball.word(i) for i in sides),
        inr,
        outr,
        area,
        word_cutoff,
        {"orbit_points": len(ball), "bisector_radius": base},
    )


def _polygon_from_ball(ball: Ball, radius: float):
    order = np.argsort(ball.displacement, kind="stable")
    poly = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
    used: List[int] = []
    for idx in order:
        if idx == 0 or ball.displacement[idx] > radius:
            continue
        q = _orbit_point(ball.matrices[idx])
        off = 1.0 - math.sqrt(max(1.0 - float(q @ q), 0.0))
        vals = poly @ q - off
        if vals.max() <= 1e-13:
            continue
        poly = _clip(poly, q, off)
        used.append(idx)
    if len(poly) < 3 or np.max(np.sum(poly ** 2, axis=1)) >= 1.0 - 1e-12:
        return None
    poly = _dedupe(_ccw(poly))
    # which bisector carries each edge
    sides = []
    qs = {i: _orbit_point(ball.matrices[i]) for i in used}
    for k in range(len(poly)):
        mid = 0.5 * (poly[k] + poly[(k + 1) % len(poly)])
        best, err = None, np.inf
        for i, q in qs.items():
            off = 1.0 - math.sqrt(max(1.0 - float(q @ q), 0.0))
            e = abs(float(q @ mid) - off) / float(np.hypot(*q))
            if e < err:
                best, err = i, e
        sides.append(best)
    area = polygon_area(poly)
    inr = min(ball.displacement[i] for i in sides) / 2.0
    outr = max(math.acosh(klein_cosh_dist(np.zeros(2), v)) for v in poly)
    return poly, sides, area, inr, outr


def _dedupe(poly: np.ndarray, tol: float = 1e-11) -> np.ndarray:
    keep = [poly[0]]
    for p in poly[1:]:
        if np.abs(p - keep[-1]).max() > tol:
            keep.append(p)
    if len(keep) > 1 and np.abs(keep[0] - keep[-1]).max() <= tol:
        keep.pop()
    return np.array(keep)
