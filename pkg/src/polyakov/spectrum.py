"""Primitive closed-geodesic length spectra with a completeness certificate.

Every primitive conjugacy class has a representative whose axis crosses the
Dirichlet domain D (center i, outradius R). If the axis crosses D at p and
the element has length l, the tiles met by the segment [p, g p] have centers
within l + 2R of i, and consecutive tiles differ by a side pairing. So a
breadth-first search over side pairings, discarding anything that moves i
further than L + 2R, reaches every such representative and terminates on its
own. The depth at which it stops is the certified word-length bound.

Classes are oriented: g and g^-1 are counted separately.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import words as W
from .domain import (
    Ball,
    DirichletDomain,
    ToleranceIndex,
    boundary_to_klein,
    dirichlet_domain,
    enumerate_ball,
)
from .errors import (
    IncompleteDomain,
    InvalidParameter,
    NotHyperbolic,
    OutOfCertifiedRange,
    UncertifiedSpectrum,
)
from .hyperbolic import (
    PARABOLIC_TOL,
    FuchsianGroupModel,
    classify_element,
    fixed_points,
    precise_abs_traces,
)

LENGTH_TOL = 1e-9
AXIS_TOL = 1e-9
DEFAULT_WORD_BOUND = 64
DEFAULT_BUDGET = 2_000_000


@dataclass(frozen=True)
class GeodesicClass:
    """All oriented primitive classes sharing one length.

    ``words`` holds one representative word per class (in the generators of
    the group), so ``len(words) == multiplicity``.
    """

    length: float
    multiplicity: int
    representative_word: W.Word
    words: Tuple[W.Word, ...] = ()
    primitive: bool = True


@dataclass(frozen=True)
class LengthSpectrum:
    cutoff: float
    classes: Tuple[GeodesicClass, ...]
    certificate: Dict[str, object] = field(default_factory=dict)
    genus: int = 0

    @property
    def certified(self) -> bool:
        return bool(self.certificate.get("complete", False))

    @property
    def lengths(self) -> np.ndarray:
        return np.array([c.length for c in self.classes])

    @property
    def multiplicities(self) -> np.ndarray:
        return np.array([c.multiplicity for c in self.classes], dtype=int)

    def multiset(self) -> np.ndarray:
        """Sorted lengths repeated by multiplicity."""
        return np.repeat(self.lengths, self.multiplicities)

    def __len__(self):
        return int(self.multiplicities.sum()) if self.classes else 0

    def truncate(self, L: float) -> "LengthSpectrum":
        if L > self.cutoff + 1e-12:
            raise OutOfCertifiedRange(f"{L} exceeds cutoff {self.cutoff}")
        cert = dict(self.certificate)
        cert["truncated_from"] = self.cutoff
        return LengthSpectrum(L, tuple(c for c in self.classes if c.length <= L), cert, self.genus)

    def to_json(self) -> str:
        return json.dumps(
            {
                "cutoff": self.cutoff,
                "genus": self.genus,
                "classes": [
                    {"length": c.length, "multiplicity": c.multiplicity, "word": list(c.representative_word)}
                    for c in self.classes
                ],
                "certificate": self.certificate,
            },
            indent=1,
            sort_keys=True,
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["length", "multiplicity"])
        for c in self.classes:
            w.writerow([repr(c.length), c.multiplicity])
        return buf.getvalue()


def synthetic_spectrum(lengths: Sequence[float], multiplicities: Sequence[int] | None = None,
                       cutoff: float | None = None, genus: int = 2) -> LengthSpectrum:
    """A certified-by-fiat spectrum from raw lengths, for tests and what-if runs."""
    mult = list(multiplicities) if multiplicities is not None else [1] * len(lengths)
    pairs = sorted(zip(map(float, lengths), map(int, mult)))
    classes = tuple(GeodesicClass(l, m, ()) for l, m in pairs if m > 0)
    L = cutoff if cutoff is not None else (pairs[-1][0] if pairs else 0.0)
    return LengthSpectrum(float(L), classes, {"complete": True, "synthetic": True}, genus)


def _lengths_from_traces(tr: np.ndarray) -> np.ndarray:
    t = np.abs(tr) / 2.0
    return np.where(t > 1.0, 2.0 * np.arccosh(np.maximum(t, 1.0)), 0.0)


def _axis_meets(domain: DirichletDomain, m: np.ndarray, tol: float = AXIS_TOL) -> bool:
    att, rep = fixed_points(m)
    p, q = boundary_to_klein(att), boundary_to_klein(rep)
    e = q - p
    v = domain.vertices_klein
    side = e[0] * (v[:, 1] - p[1]) - e[1] * (v[:, 0] - p[0])
    return side.min() <= tol and side.max() >= -tol


def _axis_key(m: np.ndarray) -> np.ndarray:
    att, rep = fixed_points(m)
    return np.concatenate([boundary_to_klein(att), boundary_to_klein(rep)])


class _UnionFind:
    def __init__(self, n: int):
        self.p = list(range(n))

    def find(self, x: int) -> int:
        while self.p[x] != x:
            self.p[x] = self.p[self.p[x]]
            x = self.p[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.p[max(ra, rb)] = min(ra, rb)


def domain_for(G: FuchsianGroupModel, center: complex = 1j, max_cutoff: int = 24) -> DirichletDomain:
    """Smallest word cutoff (from a doubling schedule) that closes the Dirichlet domain."""
    cutoff = 3
    while True:
        try:
            return dirichlet_domain(G, center, cutoff)
        except IncompleteDomain:
            if cutoff >= max_cutoff:
                raise
            cutoff = min(2 * cutoff, max_cutoff)


def side_generators(domain: DirichletDomain) -> Tuple[List[np.ndarray], List[W.Word]]:
    """One side pairing from each inverse pair, with its word."""
    mats: List[np.ndarray] = []
    words: List[W.Word] = []
    index = ToleranceIndex(4)
    for m, w in zip(domain.side_matrices, domain.side_words):
        m = m if m[0, 0] + m[1, 1] >= 0 else -m
        inv = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])
        if index.find(m.ravel()) >= 0 or index.find(inv.ravel()) >= 0:
            continue
        index.add(m.ravel())
        mats.append(m)
        words.append(w)
    return mats, words


def enumerate_spectrum(
    G: FuchsianGroupModel,
    L: float,
    *,
    center: complex = 1j,
    word_bound: int = DEFAULT_WORD_BOUND,
    budget: int = DEFAULT_BUDGET,
    prune: bool = True,
    domain: Optional[DirichletDomain] = None,
) -> LengthSpectrum:
    """Oriented primitive classes of length <= L.

    ``word_bound`` caps the search depth (in side pairings) and ``budget`` the
    number of distinct elements. If either stops the search first the result
    is raised inside ``UncertifiedSpectrum``. ``prune=False`` drops the radius
    test and explores every word up to ``word_bound``; the result is then
    marked uncertified but is returned, which is how pruning is cross-checked.
    """
    if not L > 0:
        raise InvalidParameter("L must be positive")
    if domain is None:
        domain = domain_for(G, center)
    R = domain.outradius
    radius = L + 2.0 * R + 1e-6
    gens, gen_words = side_generators(domain)
    ball = enumerate_ball(gens, gen_words, radius if prune else math.inf, word_bound, budget=budget)
    spec = _spectrum_from_ball(G, domain, ball, L)
    complete = prune and ball.complete
    cert = {
        "complete": complete,
        "max_word_length": ball.max_depth,
        "word_bound": word_bound,
        "pruning_radius": radius if prune else None,
        "outradius": R,
        "elements": len(ball),
        "sides": len(domain.side_matrices),
    }
    spec = LengthSpectrum(float(L), spec, cert, G.genus)
    if prune and not complete:
        raise UncertifiedSpectrum(
            "search stopped by word bound or budget before terminating", partial=spec
        )
    return spec


def _spectrum_from_ball(G: FuchsianGroupModel, domain: DirichletDomain, ball: Ball, L: float):
    mats = ball.matrices
    lengths = _lengths_from_traces(mats[:, 0, 0] + mats[:, 1, 1])
    tr = np.abs(mats[:, 0, 0] + mats[:, 1, 1])
    if np.any((np.abs(tr - 2.0) <= PARABOLIC_TOL)[1:]):
        raise NotHyperbolic("parabolic element found in a cocompact group")
    cand = [
        int(i)
        for i in np.nonzero((lengths > 0) & (lengths <= L + LENGTH_TOL))[0]
        if _axis_meets(domain, mats[i])
    ]
    # keep the shortest element on each oriented axis; longer ones are its powers
    axes = ToleranceIndex(4, tol=1e-7)
    best: Dict[int, int] = {}
    for i in sorted(cand, key=lambda j: (lengths[j], ball.depth[j])):
        a, new = axes.find_or_add(_axis_key(mats[i]))
        if new:
            best[a] = i
    prim = sorted(best.values())
    index = ToleranceIndex(4, tol=1e-7)
    for i in prim:
        index.add(mats[i].ravel())
    uf = _UnionFind(len(prim))
    gens = [domain.side_matrices[k] for k in range(len(domain.side_matrices))]
    for a, i in enumerate(prim):
        m = mats[i]
        for s in gens:
            si = np.array([[s[1, 1], -s[0, 1]], [-s[1, 0], s[0, 0]]])
            c = si @ m @ s
            c = c if c[0, 0] + c[1, 1] >= 0 else -c
            b = index.find(c.ravel())
            if b >= 0:
                uf.union(a, b)
    comps: Dict[int, List[int]] = {}
    for a in range(len(prim)):
        comps.setdefault(uf.find(a), []).append(prim[a])

    found = []
    for members in comps.values():
        reps = []
        for i in members:
            _, core = W.cyclic_reduce(ball.word(i))
            reps.append(core)
        rep = min(reps, key=lambda w: (len(w), w))
        length = float(np.mean([lengths[i] for i in members]))
        found.append((length, rep))
    found.sort(key=lambda t: (t[0], len(t[1]), t[1]))
    return _group_lengths(G, found)


def _group_lengths(G: FuchsianGroupModel, found) -> Tuple[GeodesicClass, ...]:
    groups: List[List[Tuple[float, W.Word]]] = []
    for item in found:
        if groups and item[0] - groups[-1][-1][0] <= LENGTH_TOL:
            groups[-1].append(item)
        else:
            groups.append([item])
    if G.exact is not None:
        groups = [g for grp in groups for g in _split_by_precise_trace(G, grp)]
    out = []
    for grp in groups:
        words = tuple(sorted((w for _, w in grp), key=lambda w: (len(w), w)))
        length = float(np.mean([l for l, _ in grp]))
        out.append(GeodesicClass(length, len(grp), words[0], words))
    return tuple(out)


def _split_by_precise_trace(G, grp):
    if len(grp) == 1:
        return [grp]
    traces = precise_abs_traces(G, [w for _, w in grp])
    parts: List[List] = []
    keys: List = []
    for item, t in zip(grp, traces):
        for k, key in enumerate(keys):
            if abs(t - key) <= 1e-30 * max(1, abs(key)):
                parts[k].append(item)
                break
        else:
            keys.append(t)
            parts.append([item])
    return parts


def counting_function(spec: LengthSpectrum, x: float) -> int:
    """Number of oriented primitive classes of length <= x."""
    if x > spec.cutoff + 1e-12:
        raise OutOfCertifiedRange(f"x = {x} exceeds certified cutoff {spec.cutoff}")
    return int(sum(c.multiplicity for c in spec.classes if c.length <= x))


def is_primitive(word: Sequence[int], G: FuchsianGroupModel, domain: Optional[DirichletDomain] = None) -> bool:
    """Whether the element of ``word`` has no proper root in G.

    A syntactic power (after cyclic reduction) answers immediately; otherwise
    the element is conjugated so its axis crosses the Dirichlet domain and the
    roots it could have are searched for geometrically.
    """
    m = G.evaluate(word)
    cl = classify_element(m)
    if cl.kind != "hyperbolic":
        raise NotHyperbolic(f"word maps to a {cl.kind} element")
    _, core = W.cyclic_reduce(word)
    if W.power_root(core)[1] > 1:
        return False
    if domain is None:
        domain = domain_for(G)
    g = domain.conjugator @ m @ np.linalg.inv(domain.conjugator)
    g = _conjugate_into_domain(domain, g)
    ell = cl.length
    gens, gen_words = side_generators(domain)
    ball = enumerate_ball(gens, gen_words, ell / 2.0 + 2.0 * domain.outradius + 1e-6, DEFAULT_WORD_BOUND)
    key = _axis_key(g)
    mats = ball.matrices
    lens = _lengths_from_traces(mats[:, 0, 0] + mats[:, 1, 1])
    for i in np.nonzero((lens > 0) & (lens < ell - LENGTH_TOL))[0]:
        ratio = ell / lens[i]
        if abs(ratio - round(ratio)) > 1e-6:
            continue
        k = _axis_key(mats[i])
        if np.abs(k - key).max() < 1e-7 or np.abs(k[[2, 3, 0, 1]] - key).max() < 1e-7:
            return False
    return True


def _conjugate_into_domain(domain: DirichletDomain, g: np.ndarray) -> np.ndarray:
    """Conjugate g so that its axis passes through the Dirichlet domain."""
    att, rep = fixed_points(g)
    # point of the axis closest to i
    if math.isinf(att) or math.isinf(rep):
        x = rep if math.isinf(att) else att
        p = complex(x, 1.0)
    else:
        c, r = (att + rep) / 2.0, abs(att - rep) / 2.0
        # closest point on the semicircle to i: along the ray from c towards i
        d = complex(-c, 1.0)
        p = c + r * d / abs(d)
    sides = [np.asarray(s) for s in domain.side_matrices]
    for _ in range(10_000):
        best = None
        dp = _cosh_dist_i(p)
        for s in sides:
            si = np.array([[s[1, 1], -s[0, 1]], [-s[1, 0], s[0, 0]]])
            q = _apply(si, p)
            if _cosh_dist_i(q) < dp - 1e-12:
                best, dp = si, _cosh_dist_i(q)
                bq = q
        if best is None:
            return g
        g = best @ g @ np.linalg.inv(best)
        p = bq
    raise InvalidParameter("point reduction did not terminate")


def _apply(m: np.ndarray, z: complex) -> complex:
    return (m[0, 0] * z + m[0, 1]) / (m[1, 0] * z + m[1, 1])


def _cosh_dist_i(z: complex) -> float:
    return 1.0 + (z.real ** 2 + (z.imag - 1.0) ** 2) / (2.0 * z.imag)
