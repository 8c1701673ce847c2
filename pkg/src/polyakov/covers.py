"""Finite unramified covers of a closed surface as permutation representations.

A cover of degree n is a transitive action of the surface group on sheets
{0..n-1}; generator k sends sheet p to ``perms[k-1][p]`` and words act on the
right. Sheet 0 is the base sheet, so a node is also the subgroup
``H = stab(0)``. Everything here is exact integer and word arithmetic.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import words as W
from .errors import (
    BudgetExceeded,
    DisconnectedCover,
    InternalError,
    InvalidParameter,
    NotASurfaceGroup,
    TowerMismatch,
    UncertifiedSpectrum,
    UnsupportedGenus,
)
from .spectrum import LENGTH_TOL, GeodesicClass, LengthSpectrum

Perm = Tuple[int, ...]
ENUMERATION_BUDGET = 5_000_000


@dataclass(frozen=True)
class SurfaceGroupPresentation:
    """<a1, b1, ..., ag, bg | [a1,b1]...[ag,bg]> with a_i = 2i-1, b_i = 2i."""

    genus: int

    def __post_init__(self):
        if self.genus < 2:
            raise UnsupportedGenus("genus must be >= 2")

    @property
    def ngens(self) -> int:
        return 2 * self.genus

    @property
    def relator(self) -> W.Word:
        return W.surface_relator(self.genus)

    def abelianization_rank(self) -> int:
        """Rank of Z^{2g} / <exponent sums of the relator>; every commutator sums to zero."""
        sums = np.zeros(self.ngens, int)
        for x in self.relator:
            sums[abs(x) - 1] += 1 if x > 0 else -1
        return self.ngens - int(np.count_nonzero(sums) > 0)

    def solver(self) -> W.DehnSolver:
        return _solver(self.genus)


@lru_cache(maxsize=None)
def _solver(genus: int) -> W.DehnSolver:
    return W.DehnSolver(W.surface_relator(genus))


def cover_genus(n: int, g: int) -> int:
    """Genus of a degree-n unramified cover: chi scales by n, so g~ - 1 = n (g - 1)."""
    if n < 1 or g < 2:
        raise InvalidParameter("need n >= 1 and g >= 2")
    return n * (g - 1) + 1


# ------------------------------------------------------------------ permutations


def _compose(a: Perm, b: Perm) -> Perm:
    """First a, then b."""
    return tuple(b[i] for i in a)


def _inv(a: Perm) -> Perm:
    out = [0] * len(a)
    for i, j in enumerate(a):
        out[j] = i
    return tuple(out)


def act(perms: Sequence[Perm], p: int, word: Iterable[int]) -> int:
    for x in word:
        p = perms[x - 1][p] if x > 0 else perms[-x - 1].index(p)
    return p


def _orbit(perms: Sequence[Perm], start: int = 0) -> List[int]:
    seen = {start}
    order = [start]
    dq = deque([start])
    while dq:
        p = dq.popleft()
        for s in perms:
            q = s[p]
            if q not in seen:
                seen.add(q)
                order.append(q)
                dq.append(q)
    return order


def _relabel(perms: Sequence[Perm], start: int) -> Tuple[Perm, ...]:
    """Relabel sheets in BFS order from ``start`` (forward generators in order)."""
    order = _orbit(perms, start)
    pos = {p: i for i, p in enumerate(order)}
    return tuple(tuple(pos[s[p]] for p in order) for s in perms)


def _canonical_unbased(perms: Sequence[Perm]) -> Tuple[Perm, ...]:
    return min(_relabel(perms, s) for s in range(len(perms[0])))


def _commutator(a: Perm, b: Perm) -> Perm:
    return _compose(_compose(_compose(a, b), _inv(a)), _inv(b))


# ------------------------------------------------------------------ nodes


@dataclass(frozen=True)
class CoverNode:
    """A based cover: ``perms`` in BFS-canonical labelling from the base sheet 0."""

    perms: Tuple[Perm, ...]
    base_genus: int

    def __post_init__(self):
        P = SurfaceGroupPresentation(self.base_genus)
        if len(self.perms) != P.ngens:
            raise NotASurfaceGroup("need one permutation per generator")
        n = len(self.perms[0])
        for p in range(n):
            if act(self.perms, p, P.relator) != p:
                raise NotASurfaceGroup("relator does not act trivially")

    @property
    def index(self) -> int:
        return len(self.perms[0])

    @property
    def transitive(self) -> bool:
        return len(_orbit(self.perms)) == self.index

    @property
    def genus(self) -> int:
        return cover_genus(self.index, self.base_genus)

    @property
    def base(self) -> SurfaceGroupPresentation:
        return SurfaceGroupPresentation(self.base_genus)

    def contains(self, word: Sequence[int]) -> bool:
        """Whether the base-group element lies in the subgroup stab(0)."""
        return act(self.perms, 0, word) == 0

    def unbased_key(self) -> Tuple[Perm, ...]:
        return _canonical_unbased(self.perms)

    def to_dict(self) -> dict:
        return {"perms": [list(p) for p in self.perms], "index": self.index, "genus": self.genus}


def make_node(perms: Sequence[Sequence[int]], base_genus: int, base_sheet: int = 0) -> CoverNode:
    perms = tuple(tuple(int(i) for i in p) for p in perms)
    if len(_orbit(perms, base_sheet)) != len(perms[0]):
        raise DisconnectedCover("permutation action is not transitive")
    return CoverNode(_relabel(perms, base_sheet), base_genus)


def trivial_node(base_genus: int) -> CoverNode:
    return CoverNode(tuple((0,) for _ in range(2 * base_genus)), base_genus)


@dataclass(frozen=True)
class CoverCensus:
    n: int
    genus: int
    nodes: Tuple[CoverNode, ...]
    based_count: int

    @property
    def unbased_count(self) -> int:
        return len(self.nodes)

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "based_count": self.based_count, "unbased_count": self.unbased_count,
                           "nodes": [{"perms": [list(p) for p in c.perms], "genus": c.genus} for c in self.nodes]},
                          indent=1, sort_keys=True)


def _class_representatives(n: int) -> List[Perm]:
    """One permutation per cycle type."""
    reps = []

    def parts(m, hi):
        if m == 0:
            yield []
            return
        for k in range(min(m, hi), 0, -1):
            for rest in parts(m - k, k):
                yield [k] + rest

    for lam in parts(n, n):
        perm = list(range(n))
        start = 0
        for k in lam:
            for i in range(k):
                perm[start + i] = start + (i + 1) % k
            start += k
        reps.append(tuple(perm))
    return reps


def enumerate_covers(P: SurfaceGroupPresentation | int, n: int, budget: int = ENUMERATION_BUDGET) -> CoverCensus:
    """All transitive degree-n representations up to conjugation, plus the number of subgroups.

    a1 runs over cycle-type representatives (every class of representations
    has such a member); the last commutator is matched through a table of
    all commutators in S_n. Nothing is returned if the candidate count would
    exceed ``budget``.
    """
    if isinstance(P, int):
        P = SurfaceGroupPresentation(P)
    if n < 1:
        raise InvalidParameter("index must be >= 1")
    g = P.genus
    Sn = list(itertools.permutations(range(n)))
    # commutator table plus, per outer tuple, an average table bucket of about n! pairs
    cost = len(Sn) ** 2 + len(_class_representatives(n)) * len(Sn) ** (2 * g - 2)
    if cost > budget:
        raise BudgetExceeded(f"index {n} needs about {cost} candidates (budget {budget})", estimate=cost)
    table: Dict[Perm, List[Tuple[Perm, Perm]]] = {}
    for a in Sn:
        for b in Sn:
            table.setdefault(_commutator(a, b), []).append((a, b))
    ident = tuple(range(n))
    seen = set()
    nodes = []
    based = 0
    for a1 in _class_representatives(n):
        for rest in itertools.product(*([Sn] * (2 * g - 3))):
            pairs = (a1,) + rest
            c = ident
            for i in range(0, len(pairs), 2):
                c = _compose(c, _commutator(pairs[i], pairs[i + 1]))
            for a, b in table.get(_inv(c), ()):
                perms = pairs + (a, b)
                if len(_orbit(perms)) != n:
                    continue
                key = _canonical_unbased(perms)
                if key in seen:
                    continue
                seen.add(key)
                based += len({_relabel(key, s) for s in range(n)})
                nodes.append(key)
    nodes.sort()
    return CoverCensus(n, g, tuple(CoverNode(k, g) for k in nodes), based)


def based_nodes(census: CoverCensus) -> List[CoverNode]:
    """Every subgroup (based cover), sorted."""
    out = set()
    for c in census.nodes:
        for s in range(c.index):
            out.add(_relabel(c.perms, s))
    return [CoverNode(k, census.genus) for k in sorted(out)]


def census_dot(nodes: Sequence[CoverNode]) -> str:
    """Containment graph (edge from cover to the covers it factors through, one step)."""
    names = {c.perms: f"n{i}" for i, c in enumerate(nodes)}
    lines = ["digraph covers {"]
    for c in nodes:
        lines.append(f'  {names[c.perms]} [label="deg {c.index}, g {c.genus}"];')
    for a in nodes:
        for b in nodes:
            if a.index > b.index and a.index % b.index == 0 and _factor_map(a, b) is not None:
                lines.append(f"  {names[a.perms]} -> {names[b.perms]};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ morphisms and meets


def _factor_map(src: CoverNode, dst: CoverNode) -> Optional[Tuple[int, ...]]:
    """Equivariant sheet map sending base to base, if stab_src(0) <= stab_dst(0)."""
    phi = {0: 0}
    dq = deque([0])
    while dq:
        p = dq.popleft()
        for s, t in zip(src.perms, dst.perms):
            q, r = s[p], t[phi[p]]
            if q in phi:
                if phi[q] != r:
                    return None
            else:
                phi[q] = r
                dq.append(q)
    return tuple(phi[p] for p in range(src.index))


@dataclass(frozen=True)
class CoverMorphism:
    """Covering map ``source -> target``; ``witness`` is the equivariant sheet map."""

    source: CoverNode
    target: CoverNode
    witness: Tuple[int, ...]

    @property
    def degree(self) -> int:
        return self.source.index // self.target.index

    def verify(self) -> bool:
        phi = self.witness
        if phi[0] != 0 or self.source.base_genus != self.target.base_genus:
            return False
        for s, t in zip(self.source.perms, self.target.perms):
            if any(phi[s[p]] != t[phi[p]] for p in range(self.source.index)):
                return False
        return True


def cover_morphism(source: CoverNode, target: CoverNode) -> CoverMorphism:
    if source.base_genus != target.base_genus:
        raise TowerMismatch("covers of different base surfaces")
    if source.index % target.index:
        raise TowerMismatch("degree does not divide")
    phi = _factor_map(source, target)
    if phi is None:
        raise TowerMismatch("subgroup of the source is not contained in that of the target")
    return CoverMorphism(source, target, phi)


def compose_morphisms(first: CoverMorphism, second: CoverMorphism) -> CoverMorphism:
    """``first: A -> B`` then ``second: B -> C``."""
    if first.target != second.source:
        raise TowerMismatch("morphisms are not composable")
    return CoverMorphism(first.source, second.target, tuple(second.witness[p] for p in first.witness))


def meet(A: CoverNode, B: CoverNode) -> CoverNode:
    """Component of the fibre product through the pair of base sheets: stab_A(0) and stab_B(0) intersected."""
    if A.base_genus != B.base_genus:
        raise TowerMismatch("covers of different base surfaces")
    start = (0, 0)
    index = {start: 0}
    order = [start]
    dq = deque([start])
    while dq:
        p, q = dq.popleft()
        for s, t in zip(A.perms, B.perms):
            v = (s[p], t[q])
            if v not in index:
                index[v] = len(order)
                order.append(v)
                dq.append(v)
    perms = tuple(tuple(index[(s[p], t[q])] for p, q in order) for s, t in zip(A.perms, B.perms))
    return CoverNode(_relabel(perms, 0), A.base_genus)


# ------------------------------------------------------------------ Reidemeister-Schreier


@dataclass(frozen=True)
class SubgroupPresentation:
    """Standard generators of stab(0) as base words, with the rewriting back.

    ``word_map[i]`` is the base word of cover generator i+1; in those
    generators the subgroup satisfies the standard genus-g~ relator.
    """

    node: CoverNode
    word_map: Tuple[W.Word, ...]
    transversal: Tuple[W.Word, ...]
    labels: Dict[Tuple[int, int], int]
    label_words: Dict[int, W.Word]
    label_elements: Dict[int, W.Word] = field(default_factory=dict)

    @property
    def genus(self) -> int:
        return len(self.word_map) // 2

    def relator_image(self) -> W.Word:
        return W.substitute(W.surface_relator(self.genus), {i + 1: w for i, w in enumerate(self.word_map)})

    def rewrite(self, word: Sequence[int]) -> W.Word:
        """Word in the cover's standard generators equal to a base word lying in the subgroup."""
        perms = self.node.perms
        p = 0
        out: List[int] = []
        for x in word:
            if x > 0:
                lab = self.labels.get((p, x))
                if lab is not None:
                    out.append(lab)
                p = perms[x - 1][p]
            else:
                q = perms[-x - 1].index(p)
                lab = self.labels.get((q, -x))
                if lab is not None:
                    out.append(-lab)
                p = q
        if p != 0:
            raise TowerMismatch("word does not lie in the subgroup")
        return W.reduce(W.substitute(out, self.label_words))


def _schreier(node: CoverNode):
    perms = node.perms
    n, k = node.index, len(perms)
    trans: Dict[int, W.Word] = {0: ()}
    tree = set()
    dq = deque([0])
    while dq:
        p = dq.popleft()
        for x in range(1, k + 1):
            for sgn in (1, -1):
                q = perms[x - 1][p] if sgn > 0 else perms[x - 1].index(p)
                if q not in trans:
                    trans[q] = trans[p] + (sgn * x,)
                    tree.add((p, x) if sgn > 0 else (q, x))
                    dq.append(q)
    labels: Dict[Tuple[int, int], int] = {}
    elements: Dict[int, W.Word] = {}
    for p in range(n):
        for x in range(1, k + 1):
            if (p, x) not in tree:
                lab = len(labels) + 1
                labels[(p, x)] = lab
                elements[lab] = W.reduce(trans[p] + (x,) + W.inverse(trans[perms[x - 1][p]]))
    return tuple(trans[p] for p in range(n)), labels, elements


def _rewrite_loop(perms, labels, start: int, word: Sequence[int]) -> W.Word:
    p = start
    out: List[int] = []
    for x in word:
        if x > 0:
            lab = labels.get((p, x))
            if lab is not None:
                out.append(lab)
            p = perms[x - 1][p]
        else:
            q = perms[-x - 1].index(p)
            lab = labels.get((q, -x))
            if lab is not None:
                out.append(-lab)
            p = q
    if p != start:
        raise InternalError("relator lift is not closed")
    return tuple(out)


@lru_cache(maxsize=4096)
def _presentation_cached(node: CoverNode) -> SubgroupPresentation:
    if not node.transitive:
        raise DisconnectedCover("node is not transitive")
    perms = node.perms
    n = node.index
    P = node.base
    trans, labels, elements = _schreier(node)
    faces = [_rewrite_loop(perms, labels, q, P.relator) for q in range(n)]
    where: Dict[int, List[int]] = {}
    for f, r in enumerate(faces):
        for x in r:
            where.setdefault(abs(x), []).append(f)
    if any(len(v) != 2 for v in where.values()):
        raise InternalError("Schreier generator does not border exactly two faces")
    # Tietze: eliminate one generator per edge of a spanning tree of faces
    acc = faces[0]
    visited = {0}
    solved: List[Tuple[int, W.Word]] = []
    dq = deque([0])
    while dq:
        f = dq.popleft()
        for x in faces[f]:
            y = abs(x)
            g = [h for h in where[y] if h != f]
            if not g or g[0] in visited:
                continue
            child = g[0]
            visited.add(child)
            dq.append(child)
            r = faces[child]
            i = next(j for j, t in enumerate(r) if abs(t) == y)
            rot = r[i:] + r[:i]
            rest = W.inverse(rot[1:])
            expr = rest if rot[0] > 0 else W.inverse(rest)
            solved.append((y, expr))
            acc = W.cyclic_reduce(W.substitute(acc, {y: expr}))[1]
    if len(visited) != n:
        raise InternalError("face graph is disconnected")
    survivors = sorted(set(abs(x) for x in acc))
    gt = cover_genus(n, P.genus)
    if len(survivors) != 2 * gt or len(acc) != 4 * gt:
        raise InternalError("rewritten relator is not a surface relator")
    # express eliminated generators through survivors, last eliminated first
    full: Dict[int, W.Word] = {}
    for y, expr in reversed(solved):
        full[y] = W.substitute(expr, full)
    ren = {s: i + 1 for i, s in enumerate(survivors)}
    rel = tuple(ren[abs(x)] * (1 if x > 0 else -1) for x in acc)
    forward, backward = W.symplectic_basis(rel, 2 * gt)
    surv_words = {i + 1: elements[s] for i, s in enumerate(survivors)}
    word_map = tuple(_solver(P.genus).reduce(W.substitute(fw, surv_words)) for fw in forward)
    # label -> word in the new standard generators
    label_words: Dict[int, W.Word] = {}
    for lab in elements:
        if lab in ren:
            label_words[lab] = backward[ren[lab]]
    for y, expr in full.items():
        label_words[y] = W.reduce(W.substitute(W.substitute(expr, {s: (ren[s],) for s in survivors}), backward))
    return SubgroupPresentation(node, word_map, trans, labels, label_words, elements)


def subgroup_generators(node: CoverNode, base_sheet: int = 0) -> SubgroupPresentation:
    """Standard generators of the subgroup of sheets fixing ``base_sheet``."""
    if base_sheet != 0:
        node = make_node(node.perms, node.base_genus, base_sheet)
    return _presentation_cached(node)


def cover_group(G, node: CoverNode):
    """The cover's Fuchsian group: matrices of the standard subgroup generators."""
    from .hyperbolic import evaluate_word, explicit_group

    pres = subgroup_generators(node)
    mats = [evaluate_word(G.matrices(), w) for w in pres.word_map]
    Gc = explicit_group(mats, W.surface_relator(pres.genus))
    prov = dict(Gc.provenance)
    prov.update({"model": "cover", "index": node.index, "perms": [list(p) for p in node.perms]})
    return type(Gc)(Gc.genus, Gc.generators, prov, Gc.relator)


def cover_domain(G, node: CoverNode, center: complex = 1j, max_cutoff: int = 24):
    """Dirichlet domain of the cover group searched with the short Schreier generators.

    Side words come out in the cover's standard generators.
    """
    from .domain import dirichlet_domain
    from .errors import IncompleteDomain
    from .hyperbolic import evaluate_word

    pres = subgroup_generators(node)
    Gc = cover_group(G, node)
    labs = sorted(pres.label_words)
    mats = [evaluate_word(G.matrices(), pres.label_elements[k]) for k in labs]
    words = [pres.label_words[k] for k in labs]
    cutoff = 3
    while True:
        try:
            return Gc, dirichlet_domain(Gc, center, cutoff, generators=mats, generator_words=words)
        except IncompleteDomain:
            if cutoff >= max_cutoff:
                raise
            cutoff *= 2


def cover_relator_defect(G, node: CoverNode, dps: int = 50) -> float:
    """Distance from +-I of the cover relator evaluated through the base matrices.

    Exact base models are evaluated at ``dps`` digits, others in floats.
    """
    from .hyperbolic import _mp_matrices, _mp_word, relator_defect, evaluate_word

    pres = subgroup_generators(node)
    rel = W.surface_relator(pres.genus)
    if G.exact is None:
        return relator_defect([evaluate_word(G.matrices(), w) for w in pres.word_map], rel)
    import mpmath as mp

    with mp.workdps(dps):
        base = _mp_matrices(G.exact(), dps)
        mats = [_mp_word(base, w) for w in pres.word_map]
        p = _mp_word(mats, rel)
        eye = mp.eye(2)
        return float(min(max(abs(v) for v in (p - eye)), max(abs(v) for v in (p + eye))))


# ------------------------------------------------------------------ spectra


def lift_spectrum(base_spec: LengthSpectrum, node: CoverNode, force: bool = False) -> LengthSpectrum:
    """Primitive classes of the cover up to the same cutoff.

    A base class of length l whose word permutes the sheets with a k-cycle
    lifts to one class of length k l per cycle.
    """
    if not base_spec.certified and not force:
        raise UncertifiedSpectrum("base spectrum is not certified", partial=base_spec)
    L = base_spec.cutoff
    trans = subgroup_generators(node).transversal
    found: List[Tuple[float, W.Word]] = []
    for c in base_spec.classes:
        for w in (c.words or (c.representative_word,)) * (1 if c.words else c.multiplicity):
            seen = set()
            for p in range(node.index):
                if p in seen:
                    continue
                cyc = [p]
                q = act(node.perms, p, w)
                while q != p:
                    cyc.append(q)
                    q = act(node.perms, q, w)
                seen.update(cyc)
                k = len(cyc)
                if k * c.length <= L + LENGTH_TOL:
                    found.append((k * c.length, W.reduce(trans[p] + tuple(w) * k + W.inverse(trans[p]))))
    found.sort(key=lambda t: (t[0], len(t[1]), t[1]))
    groups: List[List[Tuple[float, W.Word]]] = []
    for item in found:
        if groups and item[0] - groups[-1][-1][0] <= LENGTH_TOL:
            groups[-1].append(item)
        else:
            groups.append([item])
    classes = tuple(
        GeodesicClass(float(np.mean([l for l, _ in grp])), len(grp), grp[0][1], tuple(w for _, w in grp))
        for grp in groups
    )
    cert = dict(base_spec.certificate)
    cert["lifted_from_index"] = node.index
    return LengthSpectrum(L, classes, cert, node.genus)


# ------------------------------------------------------------------ virtual automorphisms


@dataclass(frozen=True)
class VirtualAutomorphism:
    """Isomorphism between finite-index subgroups, given on standard generators.

    ``images[i]`` is the base word of the image of the domain's i-th standard
    generator (it lies in ``range``); ``inverse_images`` does the same for
    the inverse map.
    """

    domain: CoverNode
    range: CoverNode
    images: Tuple[W.Word, ...]
    inverse_images: Tuple[W.Word, ...]

    def __post_init__(self):
        if self.domain.index != self.range.index:
            raise TowerMismatch("domain and range must have equal index")

    def __call__(self, word: Sequence[int]) -> W.Word:
        u = subgroup_generators(self.domain).rewrite(word)
        img = W.substitute(u, {i + 1: w for i, w in enumerate(self.images)})
        return _solver(self.domain.base_genus).reduce(img)

    @property
    def inverse(self) -> "VirtualAutomorphism":
        return VirtualAutomorphism(self.range, self.domain, self.inverse_images, self.images)


def identity_vaut(base_genus: int) -> VirtualAutomorphism:
    T = trivial_node(base_genus)
    gens = tuple(subgroup_generators(T).word_map)
    return VirtualAutomorphism(T, T, gens, gens)


def two_arrow_cycle(H: CoverNode, K: CoverNode) -> VirtualAutomorphism:
    """beta* alpha*^-1 for two covering maps from one surface Y onto X.

    Y is the abstract genus-g~ surface; alpha and beta identify its standard
    generators with those of H and of K.
    """
    if H.index != K.index or H.base_genus != K.base_genus:
        raise TowerMismatch("two-arrow cycles need covers of equal degree over one base")
    return VirtualAutomorphism(H, K, subgroup_generators(K).word_map, subgroup_generators(H).word_map)


def _fibre(N: CoverNode, K: CoverNode) -> List[int]:
    phi = _factor_map(N, K)
    if phi is None:
        raise TowerMismatch("subgroup is not contained in the range")
    return [j for j in range(N.index) if phi[j] == 0]


def preimage(r: VirtualAutomorphism, N: CoverNode) -> CoverNode:
    """{h in dom r : r(h) in N} for N inside ran r, via the induced action on sheets."""
    H = r.domain
    F = _fibre(N, r.range)
    pos = {j: i for i, j in enumerate(F)}
    pres = subgroup_generators(H)
    trans = pres.transversal
    m = len(F)
    perms = []
    for x in range(1, 2 * H.base_genus + 1):
        img = [0] * (H.index * m)
        for p in range(H.index):
            q = H.perms[x - 1][p]
            h = W.reduce(trans[p] + (x,) + W.inverse(trans[q]))
            rh = r(h)
            for j in F:
                img[p * m + pos[j]] = q * m + pos[act(N.perms, j, rh)]
        perms.append(tuple(img))
    base = pos[0]
    return make_node(perms, H.base_genus, base_sheet=base)


def compose_vaut(r1: VirtualAutomorphism, r2: VirtualAutomorphism) -> VirtualAutomorphism:
    """Germ of r1 after r2, on r2^-1(dom r1 and ran r2)."""
    if r1.domain.base_genus != r2.domain.base_genus:
        raise TowerMismatch("different base groups")
    M = meet(r1.domain, r2.range)
    D = preimage(r2, M)
    R = preimage(r1.inverse, M)
    if D.index != R.index:
        raise InternalError("composite domain and range have different index")
    images = tuple(r1(r2(w)) for w in subgroup_generators(D).word_map)
    inv = tuple(r2.inverse(r1.inverse(w)) for w in subgroup_generators(R).word_map)
    return VirtualAutomorphism(D, R, images, inv)


def germ_equal(r: VirtualAutomorphism, s: VirtualAutomorphism) -> bool:
    """Agreement on the meet of the two domains.

    Surface groups have unique roots, so agreement on any deeper
    finite-index subgroup already forces agreement there.
    """
    E = meet(r.domain, s.domain)
    solver = _solver(E.base_genus)
    for w in subgroup_generators(E).word_map:
        if not solver.equal(r(w), s(w)):
            return False
    return True
