"""Words in free groups and surface groups.

A word is a tuple of nonzero ints: ``k`` is the k-th generator (1-based) and
``-k`` its inverse. Nothing here uses floating point.
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

Word = Tuple[int, ...]


def reduce(word: Iterable[int]) -> Word:
    out: List[int] = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def inverse(word: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(word))


def concat(*words: Sequence[int]) -> Word:
    out: List[int] = []
    for w in words:
        out.extend(w)
    return reduce(out)


def cyclic_reduce(word: Sequence[int]) -> Tuple[Word, Word]:
    """Return ``(u, core)`` with ``word == u * core * u^-1`` and ``core`` cyclically reduced."""
    w = reduce(word)
    i = 0
    while i < len(w) - 1 - i and w[i] == -w[len(w) - 1 - i]:
        i += 1
    return w[:i], w[i:len(w) - i]


def power_root(word: Sequence[int]) -> Tuple[Word, int]:
    """Shortest ``r`` with ``word == r**k`` as strings; returns ``(r, k)``."""
    w = tuple(word)
    n = len(w)
    for p in range(1, n + 1):
        if n % p == 0 and w == w[:p] * (n // p):
            return w[:p], n // p
    return w, 1


def substitute(word: Sequence[int], mapping: Mapping[int, Sequence[int]]) -> Word:
    """Replace each generator ``k`` by ``mapping[k]``; missing keys are left alone."""
    out: List[int] = []
    for x in word:
        img = mapping.get(abs(x))
        if img is None:
            out.append(x)
        elif x > 0:
            out.extend(img)
        else:
            out.extend(inverse(img))
    return reduce(out)


def surface_relator(genus: int) -> Word:
    """The product of commutators [a1,b1]...[ag,bg] with a_i = 2i-1, b_i = 2i."""
    rel: List[int] = []
    for i in range(genus):
        a, b = 2 * i + 1, 2 * i + 2
        rel.extend((a, b, -a, -b))
    return tuple(rel)


def cyclic_conjugates(word: Sequence[int]) -> List[Word]:
    w = tuple(word)
    return [w[i:] + w[:i] for i in range(len(w))]


def format_word(word: Sequence[int], names: Sequence[str] | None = None) -> str:
    if not word:
        return "1"
    parts = []
    for x in word:
        name = names[abs(x) - 1] if names else f"x{abs(x)}"
        parts.append(name if x > 0 else name + "^-1")
    return " ".join(parts)


class DehnSolver:
    """Word problem for a one-relator group whose relator satisfies C'(1/6).

    The standard surface relator of genus >= 2 qualifies, so Dehn's algorithm
    decides triviality exactly.
    """

    def __init__(self, relator: Sequence[int]):
        rel = reduce(relator)
        self.relator = rel
        n = len(rel)
        self._half = n // 2
        self._table: Dict[Word, Word] = {}
        for r in cyclic_conjugates(rel) + cyclic_conjugates(inverse(rel)):
            for k in range(self._half + 1, n + 1):
                self._table[r[:k]] = inverse(r[k:])
        self._lengths = sorted({len(k) for k in self._table}, reverse=True)

    def reduce(self, word: Iterable[int]) -> Word:
        stack: List[int] = []
        pending = list(reversed(tuple(word)))
        table = self._table
        while pending:
            x = pending.pop()
            if stack and stack[-1] == -x:
                stack.pop()
                continue
            stack.append(x)
            for k in self._lengths:
                if len(stack) < k:
                    continue
                rep = table.get(tuple(stack[-k:]))
                if rep is not None:
                    del stack[-k:]
                    pending.extend(reversed(rep))
                    break
        return tuple(stack)

    def is_trivial(self, word: Iterable[int]) -> bool:
        # Dehn reduction of a word is not cyclic; a trivial word always reduces to empty.
        return not self.reduce(word)

    def equal(self, u: Sequence[int], v: Sequence[int]) -> bool:
        return self.is_trivial(tuple(u) + inverse(v))


def symplectic_basis(relator: Sequence[int], ngens: int):
    """Bring a one-vertex orientable quadratic relator to product-of-commutators form.

    ``relator`` involves generators ``1..ngens`` each exactly once with each
    sign. Returns ``(forward, backward)``: ``forward[i]`` (i = 0..ngens-1) is
    the word in the old generators for new generator ``i+1``; ``backward[k]``
    is the word in new generators for old generator ``k``. In the new
    generators the relator becomes ``surface_relator(ngens // 2)`` up to
    cyclic conjugation.
    """
    rel = reduce(relator)
    counts: Dict[int, int] = {}
    for x in rel:
        counts[x] = counts.get(x, 0) + 1
    for k in range(1, ngens + 1):
        if counts.get(k) != 1 or counts.get(-k) != 1:
            raise ValueError("relator is not orientable quadratic in all generators")
    if len(rel) != 2 * ngens or ngens % 2:
        raise ValueError("relator has the wrong length")

    # Labels > ngens are fresh. expr[label] = word in old generators.
    expr: Dict[int, Word] = {k: (k,) for k in range(1, ngens + 1)}
    back: Dict[int, Word] = {k: (k,) for k in range(1, ngens + 1)}
    fresh = [ngens]

    def new_label(value: Word) -> int:
        fresh[0] += 1
        expr[fresh[0]] = value
        return fresh[0]

    def expr_of(word: Sequence[int]) -> Word:
        out: List[int] = []
        for x in word:
            out.extend(expr[x] if x > 0 else inverse(expr[-x]))
        return reduce(out)

    def replace(label: int, image: Word) -> None:
        for k in back:
            back[k] = substitute(back[k], {label: image})

    done: List[Tuple[int, int]] = []
    work: List[int] = list(rel)
    while work:
        pos = {x: i for i, x in enumerate(work)}
        choice = None
        for p, x in enumerate(work):
            q = pos[-x]
            if q < p:
                continue
            inner = set(work[p + 1:q])
            for iy in range(p + 1, q):
                if -work[iy] not in inner:
                    choice = (p, q, iy)
                    break
            if choice:
                break
        if choice is None:
            raise ValueError("relator has more than one vertex class")
        p, q, iy = choice
        prefix = tuple(work[:p])
        if prefix:
            # Rotating the remainder conjugates the finished commutators.
            rest = tuple(work[p:])
            for j, (a, b) in enumerate(done):
                na = new_label(expr_of(rest + (a,) + inverse(rest)))
                nb = new_label(expr_of(rest + (b,) + inverse(rest)))
                replace(a, inverse(rest) + (na,) + rest)
                replace(b, inverse(rest) + (nb,) + rest)
                done[j] = (na, nb)
            work = list(rest + prefix)
            iy -= p
            q -= p
        w = tuple(work)
        x, y = w[0], w[iy]
        A, B = w[1:iy], w[iy + 1:q]
        r = w[q + 1:]
        j = r.index(-y)
        C, D = r[:j], r[j + 1:]
        # x = x1 A^-1
        x1 = new_label(expr_of((x,) + A))
        img = (x1,) + inverse(A)
        replace(abs(x), img if x > 0 else inverse(img))
        # y = y1 A^-1 B^-1
        y1 = new_label(expr_of((y,) + B + A))
        img = (y1,) + inverse(A) + inverse(B)
        replace(abs(y), img if y > 0 else inverse(img))
        # x1 = (C B A) x2
        u = C + B + A
        x2 = new_label(expr_of(inverse(u) + (x1,)))
        replace(x1, u + (x2,))
        # [x2, y1] (D C B A) = u^-1 w u, so the finished part is conjugated by u^-1 as well
        if u:
            for j, (a, b) in enumerate(done):
                na = new_label(expr_of(inverse(u) + (a,) + u))
                nb = new_label(expr_of(inverse(u) + (b,) + u))
                replace(a, u + (na,) + inverse(u))
                replace(b, u + (nb,) + inverse(u))
                done[j] = (na, nb)
        done.append((x2, y1))
        tail = D + C + B + A
        if reduce(tail) != tail:
            raise ValueError("relator has more than one vertex class")
        work = list(tail)

    order = [lab for pair in done for lab in pair]
    rename = {lab: i + 1 for i, lab in enumerate(order)}
    forward = [expr[lab] for lab in order]
    backward = {}
    for k in range(1, ngens + 1):
        backward[k] = tuple(rename[abs(x)] * (1 if x > 0 else -1) for x in back[k])
    return forward, backward
