"""Truncated Selberg zeta values and the density factor Z'(1)^-13 Z(2).

All products are accumulated as sums of ``log1p``. Missing classes beyond
the spectrum cutoff are accounted for with the prime geodesic asymptotics
N(x) ~ Li(e^x) = Ei(x): either as an error bar (``zeta_truncated``) or as an
explicit completion of the product near s = 1 (``z_prime_at_one``), where
any finite product stays bounded away from zero.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import exp1, expi

from .errors import IncompleteSpectrum, OutsideConvergenceDomain, UnstableEstimate
from .spectrum import LengthSpectrum

TERM_FLOOR = 1e-16
TAIL_SAFETY = 2.0
SCALE_CONVENTION = (
    "defined up to a global constant independent of the surface; "
    "only ratios between surfaces are meaningful"
)


@dataclass(frozen=True)
class ZetaEvaluation:
    s: float
    value: float
    log_value: float
    spectrum_cutoff: float
    n_max: int
    tail_estimate: float
    n_tail: float = 0.0
    length_tail: float = 0.0


def _check(spec: LengthSpectrum, force: bool) -> None:
    if not spec.certified and not force:
        raise IncompleteSpectrum("spectrum is not certified complete; pass force=True to use it anyway")


def _adaptive_nmax(lmin: float, s: float) -> int:
    # first n with exp(-lmin (s + n)) < TERM_FLOOR
    return max(0, math.floor(-math.log(TERM_FLOOR) / lmin - s) + 1)


def _log_product(lengths: np.ndarray, mult: np.ndarray, s: float, n_max: int) -> float:
    if len(lengths) == 0:
        return 0.0
    n = np.arange(n_max + 1)
    x = np.exp(-np.outer(lengths, s + n))
    return float(np.sum(mult[:, None] * np.log1p(-x)))


def count_ratio(spec: LengthSpectrum, lo: float, hi: float) -> float:
    """max over x in [lo, hi] of N(x) / Ei(x), sampled at the class lengths and at hi."""
    xs = [c.length for c in spec.classes if lo <= c.length <= hi] + [hi]
    best = 0.0
    cum = np.cumsum(spec.multiplicities) if spec.classes else np.zeros(0)
    for x in xs:
        k = int(np.searchsorted(spec.lengths, x, side="right")) if spec.classes else 0
        n = int(cum[k - 1]) if k else 0
        best = max(best, n / expi(x))
    return best


def length_tail(spec: LengthSpectrum, s: float) -> float:
    """Estimated |log| contribution of classes longer than the cutoff.

    The density of classes is taken as C e^x / x with C a safety multiple of
    the largest observed N(x)/Ei(x) on [L/2, L]; the n-sum and the log are
    majorized by the factor 1/((1 - e^-sL)(1 - e^-L)).
    """
    L = spec.cutoff
    if L <= 0:
        return math.inf
    C = TAIL_SAFETY * max(1.0, count_ratio(spec, L / 2.0, L))
    kappa = 1.0 / ((1.0 - math.exp(-s * L)) * (1.0 - math.exp(-L)))
    return float(C * kappa * exp1((s - 1.0) * L))


def zeta_truncated(spec: LengthSpectrum, s: float, n_max: Optional[int] = None, force: bool = False) -> ZetaEvaluation:
    """Product over classes (with multiplicity) and n = 0..n_max of (1 - e^{-l(s+n)})."""
    if not s > 1.0:
        raise OutsideConvergenceDomain(f"s = {s} must exceed 1")
    _check(spec, force)
    lengths, mult = spec.lengths, spec.multiplicities
    if len(lengths) == 0:
        lt = length_tail(spec, s) if spec.cutoff > 0 else 0.0
        return ZetaEvaluation(float(s), 1.0, 0.0, spec.cutoff, 0, lt, 0.0, lt)
    lmin = float(lengths.min())
    if n_max is None:
        n_max = _adaptive_nmax(lmin, s)
    logv = _log_product(lengths, mult, s, n_max)
    x0 = np.exp(-lengths * (s + n_max + 1))
    n_tail = float(np.sum(mult * x0 / (1.0 - x0) / (1.0 - np.exp(-lengths))))
    lt = length_tail(spec, s)
    return ZetaEvaluation(float(s), math.exp(logv), logv, spec.cutoff, int(n_max), n_tail + lt, n_tail, lt)


def zeta_table_csv(spec: LengthSpectrum, s_values: Sequence[float], force: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["s", "Z_trunc", "tail_estimate"])
    for s in s_values:
        z = zeta_truncated(spec, s, force=force)
        w.writerow([repr(float(s)), repr(z.value), repr(z.tail_estimate)])
    return buf.getvalue()


# ------------------------------------------------------------------ s -> 1


def completion_log(L: float, s: float) -> float:
    """log of the product over classes longer than L under density e^x / x.

    -sum_{n>=0} sum_{k>=1} E1((k (s + n) - 1) L) / k, summed until negligible.
    """
    total = 0.0
    n = 0
    while True:
        k = 1
        row = 0.0
        while True:
            a = (k * (s + n) - 1.0) * L
            t = exp1(a) / k
            row += t
            if t < 1e-18:
                break
            k += 1
        total += row
        if row < 1e-18:
            break
        n += 1
    return -total


def _completed_log_zeta(lengths: np.ndarray, mult: np.ndarray, L: float, s: float) -> float:
    n_max = _adaptive_nmax(float(lengths.min()), s) if len(lengths) else 0
    return _log_product(lengths, mult, s, n_max) + completion_log(L, s)


def neville(h: Sequence[float], f: Sequence[float]) -> List[List[float]]:
    """Neville tableau for the polynomial through (h_i, f_i) evaluated at 0."""
    T = [list(map(float, f))]
    for j in range(1, len(h)):
        prev = T[-1]
        T.append([(h[i + j] * prev[i] - h[i] * prev[i + 1]) / (h[i + j] - h[i]) for i in range(len(h) - j)])
    return T


@dataclass(frozen=True)
class ZPrimeEstimate:
    value: float
    uncertainty: float
    spread: float
    drift: float
    K: int
    unstable: bool
    reason: str = ""
    samples: Tuple[Tuple[float, float], ...] = ()

    @property
    def interval(self) -> Tuple[float, float]:
        return (self.value - self.uncertainty, self.value + self.uncertainty)


def _extrapolate(lengths, mult, L, K) -> Tuple[float, float, List[Tuple[float, float]]]:
    hs = [2.0 ** -k for k in range(1, K + 1)]
    fs = [math.exp(_completed_log_zeta(lengths, mult, L, 1.0 + h)) / h for h in hs]
    T = neville(hs, fs)
    value = T[-1][0]
    spread = abs(value - T[-2][-1]) if K > 1 else abs(value)
    return value, spread, list(zip(hs, fs))


def z_prime_at_one(spec: LengthSpectrum, K: int = 3, force: bool = False, drift_step: float = 1.0) -> ZPrimeEstimate:
    """Estimate of lim_{s->1} Z(s)/(s-1).

    The truncated product is completed beyond the cutoff by the prime geodesic
    asymptotics, then Z(1+h)/h at h = 2^-k (k = 1..K) is extrapolated to h = 0
    with Neville's scheme. The reported uncertainty adds the tableau spread
    to the drift of the estimate when the cutoff is lowered by ``drift_step``.
    The estimate is flagged unstable when that exceeds half the value, or
    when the observed class count is far from Ei(L) (the completion then has
    no footing).
    """
    _check(spec, force)
    if K < 2:
        raise OutsideConvergenceDomain("need K >= 2 extrapolation points")
    L = spec.cutoff
    lengths, mult = spec.lengths, spec.multiplicities
    value, spread, samples = _extrapolate(lengths, mult, L, K)
    L2 = L - drift_step
    if L2 > 0:
        sub = spec.lengths <= L2
        v2, _, _ = _extrapolate(lengths[sub], mult[sub], L2, K)
        drift = abs(value - v2)
    else:
        drift = math.inf
    unc = spread + drift
    reasons = []
    ratio = (len(spec) / expi(L)) if L > 0 else 0.0
    if not (0.25 <= ratio <= 4.0):
        reasons.append(f"class count N(L)/Ei(L) = {ratio:.3g} is inconsistent with a surface spectrum")
    if not math.isfinite(value) or value <= 0 or unc > 0.5 * abs(value):
        reasons.append(f"extrapolation uncertainty {unc:.3g} exceeds half of {value:.3g}")
    return ZPrimeEstimate(float(value), float(unc), float(spread), float(drift), K, bool(reasons), "; ".join(reasons), tuple(samples))


@dataclass(frozen=True)
class PolyakovDensity:
    z_prime_at_1: float
    z_prime_uncertainty: float
    z_at_2: float
    z_at_2_tail: float
    density_ratio: float
    interval: Tuple[float, float]
    spectrum_cutoff: float
    unstable: bool = False
    reason: str = ""
    scale_convention: str = SCALE_CONVENTION
    meta: dict = field(default_factory=dict)

    def contains(self, x: float) -> bool:
        return self.interval[0] <= x <= self.interval[1]

    def to_json(self) -> str:
        d = asdict(self)
        d["interval"] = list(self.interval)
        return json.dumps(d, indent=1, sort_keys=True, default=_json_float)


def _json_float(x):
    return float(x)


def density_from_values(z_prime: float, z2: float) -> float:
    return float(z_prime) ** -13 * float(z2)


def density_interval(zp: float, zp_unc: float, z2: float, z2_log_tail: float) -> Tuple[float, float]:
    lo_zp, hi_zp = zp - zp_unc, zp + zp_unc
    z2_lo, z2_hi = z2 * math.exp(-z2_log_tail), z2 * math.exp(z2_log_tail)
    lo = density_from_values(hi_zp, z2_lo)
    hi = density_from_values(lo_zp, z2_hi) if lo_zp > 0 else math.inf
    return lo, hi


def polyakov_density(spec: LengthSpectrum, K: int = 3, force: bool = False, allow_unstable: bool = False) -> PolyakovDensity:
    """Z'(1)^-13 Z(2) with the uncertainty of both factors pushed through."""
    zp = z_prime_at_one(spec, K=K, force=force)
    z2 = zeta_truncated(spec, 2.0, force=force)
    ratio = density_from_values(zp.value, z2.value) if zp.value > 0 else math.inf
    interval = density_interval(zp.value, zp.uncertainty, z2.value, z2.tail_estimate)
    out = PolyakovDensity(
        zp.value,
        zp.uncertainty,
        z2.value,
        z2.tail_estimate,
        ratio,
        interval,
        spec.cutoff,
        zp.unstable,
        zp.reason,
        meta={"K": K, "spread": zp.spread, "drift": zp.drift},
    )
    if zp.unstable and not allow_unstable:
        raise UnstableEstimate(zp.reason, result=out)
    return out
