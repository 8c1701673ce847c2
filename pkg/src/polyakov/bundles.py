"""Rational weights of determinant bundles over the cover tower.

A bundle is recorded by its weight in Q on a node, relative to DET_1 on
that node. Pullback along a degree-d covering multiplies the weight by d;
weights are compared across the tower after dividing by the node's total
index over the base. No floats enter any weight computation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

from .covers import CoverMorphism, CoverNode, compose_morphisms
from .errors import InvalidDegree, TowerMismatch

PHASE_ORDER = 12


def mumford_exponent(n: int) -> int:
    """Exponent e(n) with DET_n = DET_1^e(n): 6 n^2 - 6 n + 1."""
    n = int(n)
    return 6 * n * n - 6 * n + 1


def serre_dual(n: int) -> int:
    return 1 - int(n)


def same_bundle(n1: int, n2: int) -> bool:
    """DET_n and DET_{1-n} are canonically identified."""
    return n1 == n2 or n1 == serre_dual(n2)


@dataclass(frozen=True)
class BundleWeight:
    node: CoverNode
    n: int
    weight: Fraction

    def __post_init__(self):
        if not isinstance(self.weight, Fraction):
            if isinstance(self.weight, float):
                raise TypeError("weights are exact rationals")
            object.__setattr__(self, "weight", Fraction(self.weight))

    @property
    def label(self) -> int:
        """Representative of {n, 1 - n}."""
        return min(self.n, serre_dual(self.n))

    def same_as(self, other: "BundleWeight") -> bool:
        return self.node == other.node and same_bundle(self.n, other.n) and self.weight == other.weight

    def to_dict(self) -> dict:
        return {"perms": [list(p) for p in self.node.perms], "n": self.n, "weight": _frac(self.weight)}


def _frac(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def mumford_weight(node: CoverNode, n: int) -> BundleWeight:
    """DET_n on ``node`` in units of DET_1."""
    return BundleWeight(node, n, Fraction(mumford_exponent(n)))


def pullback_weight(b: BundleWeight, m: CoverMorphism) -> BundleWeight:
    """Pull back from ``m.target`` to ``m.source``: the weight gains the factor deg m."""
    if b.node != m.target:
        raise TowerMismatch("bundle does not live on the target of the covering map")
    return BundleWeight(m.source, b.n, b.weight * m.degree)


def pullback_chain(b: BundleWeight, chain: Sequence[CoverMorphism]) -> BundleWeight:
    """Pull back step by step; ``chain[0]`` maps onto ``b.node`` and each next map onto the previous source."""
    for m in chain:
        b = pullback_weight(b, m)
    return b


def compose_chain(chain: Sequence[CoverMorphism]) -> Optional[CoverMorphism]:
    """The composite covering map of a chain as ordered in ``pullback_chain``."""
    out = None
    for m in chain:
        out = m if out is None else compose_morphisms(m, out)
    return out


def limit_weight(chain: Sequence[CoverMorphism], b: BundleWeight) -> Fraction:
    """Weight of the pulled-back bundle divided by the final node's index over the base."""
    top = b.node
    for m in chain:
        if m.target != top:
            raise TowerMismatch("chain is not composable")
        top = m.source
    w = pullback_chain(b, chain).weight
    return Fraction(w, top.index)


def weight_table_json(rows: Iterable[BundleWeight]) -> str:
    return json.dumps({"weights": [r.to_dict() for r in rows]}, indent=1, sort_keys=True)


def mumford_table(lo: int, hi: int) -> List[dict]:
    return [{"n": n, "exponent": mumford_exponent(n), "dual": serre_dual(n)} for n in range(lo, hi + 1)]


# ------------------------------------------------------------------ fibres


@dataclass(frozen=True)
class FiberPoint:
    """Point of a fibre in a fixed trivialization.

    Either a Gaussian rational ``re + i im`` or, for roots of unity and other
    unit-circle points, an exact angle in ``turns`` (fraction of a full turn).
    """

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)
    turns: Optional[Fraction] = None

    @staticmethod
    def from_turns(q) -> "FiberPoint":
        return FiberPoint(turns=Fraction(q) % 1)

    @staticmethod
    def rational(re, im=0) -> "FiberPoint":
        return FiberPoint(Fraction(re), Fraction(im))

    @property
    def on_unit_circle(self) -> bool:
        return self.turns is not None or self.re * self.re + self.im * self.im == 1

    def modulus_squared(self) -> Fraction:
        if self.turns is not None:
            return Fraction(1)
        return self.re * self.re + self.im * self.im

    def __mul__(self, other: "FiberPoint") -> "FiberPoint":
        if self.turns is not None and other.turns is not None:
            return FiberPoint.from_turns(self.turns + other.turns)
        if self.turns is not None or other.turns is not None:
            raise TypeError("mixing angle and coordinate representations is not exact")
        return FiberPoint(self.re * other.re - self.im * other.im, self.re * other.im + self.im * other.re)

    def __complex__(self) -> complex:
        if self.turns is not None:
            import cmath
            import math

            return cmath.exp(2j * math.pi * float(self.turns))
        return complex(float(self.re), float(self.im))


def power_map(p: FiberPoint, d: int) -> FiberPoint:
    """lambda -> lambda^d on a fibre; exact, and the unit circle goes to itself."""
    if not isinstance(d, int) or d < 1:
        raise InvalidDegree(f"degree must be a positive integer, got {d!r}")
    if p.turns is not None:
        return FiberPoint.from_turns(p.turns * d)
    out = FiberPoint(Fraction(1), Fraction(0))
    base = p
    k = d
    while k:
        if k & 1:
            out = out * base
        base = base * base
        k >>= 1
    return out


def winding_number(d: int, samples: int = 64) -> Fraction:
    """Total turns of the image of the circle under the power map, tracked exactly."""
    total = Fraction(0)
    prev = power_map(FiberPoint.from_turns(0), d).turns
    for k in range(1, samples + 1):
        cur = power_map(FiberPoint.from_turns(Fraction(k, samples)), d).turns
        step = (cur - prev) % 1
        # each arc of the source is 1/samples; its image is d/samples, taken as the short way when < 1/2
        if Fraction(d, samples) >= Fraction(1, 2):
            raise InvalidDegree("sample the circle more finely than 2 d points")
        total += step
        prev = cur
    return total


@dataclass(frozen=True)
class Phase:
    """An isomorphism phase known only up to 12th roots of unity."""

    turns: Fraction

    def __eq__(self, other) -> bool:
        if not isinstance(other, Phase):
            return NotImplemented
        return ((self.turns - other.turns) * PHASE_ORDER).denominator == 1

    def __hash__(self) -> int:
        return hash((self.turns * PHASE_ORDER) % 1)
