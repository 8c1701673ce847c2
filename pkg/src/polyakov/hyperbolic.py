"""Cocompact Fuchsian groups acting on the upper half-plane.

Group elements are stored as real 2x2 matrices of determinant one, modulo
sign. Generators of a surface group are ordered ``a1, b1, ..., ag, bg`` and,
unless a model says otherwise, satisfy ``[a1,b1]...[ag,bg] = +-I``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from . import words as W
from .errors import InvalidParameter, NotASurfaceGroup, UnsupportedGenus

PARABOLIC_TOL = 1e-9
RELATOR_TOL = 1e-9
DET_TOL = 1e-12


class Classification(NamedTuple):
    kind: str  # "elliptic" | "parabolic" | "hyperbolic"
    length: Optional[float] = None


def normalize_matrix(m) -> np.ndarray:
    """Rescale to determinant one (determinant must be positive)."""
    m = np.asarray(m, dtype=float)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if not det > 0:
        raise InvalidParameter("matrix does not have positive determinant", det=float(det))
    return m / math.sqrt(det)


def inverse_matrix(m: np.ndarray) -> np.ndarray:
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])


def translation_length(trace: float) -> float:
    t = abs(trace) / 2.0
    return 2.0 * math.acosh(t) if t > 1.0 else 0.0


def classify_trace(trace: float, tol: float = PARABOLIC_TOL) -> Classification:
    t = abs(trace)
    if abs(t - 2.0) <= tol:
        return Classification("parabolic")
    if t < 2.0:
        return Classification("elliptic")
    return Classification("hyperbolic", translation_length(t))


@dataclass(frozen=True)
class MoebiusElement:
    """The transformation z -> (az+b)/(cz+d) with ad - bc = 1, up to sign."""

    a: float
    b: float
    c: float
    d: float

    @classmethod
    def from_matrix(cls, m, normalize: bool = True) -> "MoebiusElement":
        m = normalize_matrix(m) if normalize else np.asarray(m, dtype=float)
        return cls(float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> float:
        return self.a + self.d

    def __matmul__(self, other: "MoebiusElement") -> "MoebiusElement":
        return MoebiusElement.from_matrix(self.matrix @ other.matrix)

    def __neg__(self) -> "MoebiusElement":
        return MoebiusElement(-self.a, -self.b, -self.c, -self.d)

    def inverse(self) -> "MoebiusElement":
        return MoebiusElement(self.d, -self.b, -self.c, self.a)

    def __call__(self, z: complex) -> complex:
        return (self.a * z + self.b) / (self.c * z + self.d)

    def classify(self, tol: float = PARABOLIC_TOL) -> Classification:
        return classify_trace(self.trace, tol)

    def fixed_points(self) -> Tuple[complex, complex]:
        """(attracting, repelling) for hyperbolic elements."""
        return fixed_points(self.matrix)


def classify_element(m, tol: float = PARABOLIC_TOL) -> Classification:
    if isinstance(m, MoebiusElement):
        return m.classify(tol)
    m = np.asarray(m, dtype=float)
    return classify_trace(m[0, 0] + m[1, 1], tol)


def fixed_points(m: np.ndarray) -> Tuple[float, float]:
    """Attracting and repelling fixed points on the real line of a hyperbolic matrix."""
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    if a + d < 0:
        a, b, c, d = -a, -b, -c, -d
    tr = a + d
    disc = math.sqrt(max(tr * tr - 4.0, 0.0))
    lam = (tr + disc) / 2.0  # eigenvalue > 1

    def point(mu: float) -> float:
        # eigenvector (mu - d, c) ~ (b, mu - a); use the better-conditioned form
        p, q = mu - d, mu - a
        if abs(p) >= abs(q):
            return p / c if c != 0 else math.inf
        return b / q if q != 0 else math.inf

    return point(lam), point(1.0 / lam)


def axis_transform(m: np.ndarray) -> np.ndarray:
    """Matrix g with g^-1 m g = diag(e^{l/2}, e^{-l/2}); maps 0, inf to the repelling, attracting points."""
    x_att, x_rep = fixed_points(m)
    if math.isinf(x_att):
        g = np.array([[1.0, x_rep], [0.0, 1.0]])
    elif math.isinf(x_rep):
        g = np.array([[x_att, -1.0], [1.0, 0.0]])
    else:
        g = np.array([[x_att, x_rep], [1.0, 1.0]])
    det = np.linalg.det(g)
    if det < 0:
        g[:, 1] *= -1
        det = -det
    return g / math.sqrt(det)


def reflection_in_axis(m: np.ndarray) -> np.ndarray:
    """Orientation-reversing reflection in the axis of ``m``, as a det -1 matrix acting on conj(z)."""
    g = axis_transform(m)
    return g @ np.diag([-1.0, 1.0]) @ inverse_matrix(g)


def translation_along_axis(m: np.ndarray, distance: float) -> np.ndarray:
    g = axis_transform(m)
    return g @ np.diag([math.exp(distance / 2), math.exp(-distance / 2)]) @ inverse_matrix(g)


def hyperbolic_distance(z: complex, w: complex) -> float:
    return math.acosh(1.0 + abs(z - w) ** 2 / (2.0 * z.imag * w.imag))


def displacement_at_i(m: np.ndarray) -> np.ndarray:
    """d(i, m(i)) for one matrix or a stack of shape (..., 2, 2)."""
    s = np.sum(np.asarray(m) ** 2, axis=(-2, -1)) / 2.0
    return np.arccosh(np.maximum(s, 1.0))


def moving_to_i(center: complex) -> np.ndarray:
    """SL2 matrix sending ``center`` to i."""
    x, y = center.real, center.imag
    if y <= 0:
        raise InvalidParameter("center must lie in the upper half-plane")
    return np.array([[1.0, -x], [0.0, y]]) / math.sqrt(y)


def sign_fix(m: np.ndarray) -> np.ndarray:
    return -m if m[0, 0] + m[1, 1] < 0 else m


def relator_defect(mats: Sequence[np.ndarray], relator: Sequence[int]) -> float:
    p = evaluate_word([np.asarray(m, dtype=np.longdouble) for m in mats], relator)
    eye = np.eye(2, dtype=np.longdouble)
    return float(min(np.abs(p - eye).max(), np.abs(p + eye).max()))


def evaluate_word(mats: Sequence[np.ndarray], word: Sequence[int]) -> np.ndarray:
    """Product of generator matrices along a word.

    Generators are unimodular, so no renormalization is applied: for long
    words ad - bc is dominated by cancellation and dividing by it only adds
    error.
    """
    out = np.eye(2, dtype=np.result_type(mats[0]) if len(mats) else float)
    for x in word:
        out = out @ (mats[x - 1] if x > 0 else inverse_matrix(mats[-x - 1]))
    return out


def _balanced_center(mats: Sequence[np.ndarray]) -> complex:
    """A point roughly minimizing the total displacement of the generators."""
    from scipy.optimize import minimize

    def cost(v):
        r = moving_to_i(complex(v[0], math.exp(v[1])))
        ri = inverse_matrix(r)
        return float(sum(np.sum((r @ m @ ri) ** 2) for m in mats))

    res = minimize(cost, np.zeros(2), method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12})
    return complex(res.x[0], math.exp(res.x[1]))


@dataclass(frozen=True)
class FuchsianGroupModel:
    """Generators of a cocompact torsion-free Fuchsian group.

    ``relator`` is the single defining relation in the generator letters
    (the standard product of commutators unless the model came from a cover).
    ``provenance`` records how the group was built.
    """

    genus: int
    generators: Tuple[MoebiusElement, ...]
    provenance: Mapping[str, Any] = field(default_factory=dict)
    relator: Tuple[int, ...] = ()
    exact: Any = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.relator:
            object.__setattr__(self, "relator", W.surface_relator(self.genus))

    @property
    def area(self) -> float:
        return 4.0 * math.pi * (self.genus - 1)

    @property
    def rank(self) -> int:
        return len(self.generators)

    def matrices(self) -> List[np.ndarray]:
        return [g.matrix for g in self.generators]

    def evaluate(self, word: Sequence[int]) -> np.ndarray:
        return evaluate_word(self.matrices(), word)

    def relator_defect(self) -> float:
        """max-norm distance of the relator product from +-I.

        Models with exact entries are evaluated at 50 significant digits;
        float models in extended precision.
        """
        if self.exact is not None:
            return _exact_relator_defect(self.exact(), self.relator)
        return relator_defect(self.matrices(), self.relator)

    def conjugate(self, r) -> "FuchsianGroupModel":
        """The group r G r^-1 (``r`` any positive-determinant matrix)."""
        r = normalize_matrix(np.asarray(r.matrix if isinstance(r, MoebiusElement) else r))
        ri = inverse_matrix(r)
        gens = tuple(MoebiusElement.from_matrix(r @ g @ ri) for g in self.matrices())
        prov = dict(self.provenance)
        prov["conjugated"] = True
        exact = None
        if self.exact is not None:
            # the float entries of r are exact binary rationals, so the
            # conjugated exact model stays exact
            exact = _conjugated_exact(self.exact, tuple(float(x) for x in r.ravel()))
        return FuchsianGroupModel(self.genus, gens, prov, self.relator, exact=exact)

    def validate(self) -> "FuchsianGroupModel":
        if self.genus < 2:
            raise UnsupportedGenus(f"genus {self.genus} < 2")
        if self.rank != 2 * self.genus:
            raise NotASurfaceGroup("need 2g generators", rank=self.rank)
        for k, g in enumerate(self.generators):
            if abs(g.det - 1.0) > DET_TOL:
                raise NotASurfaceGroup("generator not normalized", index=k)
            if g.classify().kind != "hyperbolic":
                raise NotASurfaceGroup("generator is not hyperbolic", index=k)
        defect = self.relator_defect()
        if defect > RELATOR_TOL:
            raise NotASurfaceGroup("relator defect too large", defect=defect)
        return self


def _conjugated_exact(base, r_entries):
    @lru_cache(maxsize=None)
    def exact():
        import sympy as sp

        R = sp.Matrix(2, 2, [sp.Rational(x) for x in r_entries])
        adj = sp.Matrix([[R[1, 1], -R[0, 1]], [-R[1, 0], R[0, 0]]])
        det = R.det()
        return tuple(R * m * adj / det for m in base())

    return exact


def _mp_matrices(exact_mats, dps: int):
    import mpmath as mp
    import sympy as sp

    return [mp.matrix([[mp.mpf(str(sp.N(e, dps))) for e in row] for row in m.tolist()]) for m in exact_mats]


def _mp_word(mats, word):
    import mpmath as mp

    p = mp.eye(2)
    for x in word:
        p = p * (mats[x - 1] if x > 0 else mats[-x - 1] ** -1)
    return p


def _exact_relator_defect(exact_mats, relator) -> float:
    import mpmath as mp

    with mp.workdps(50):
        p = _mp_word(_mp_matrices(exact_mats, 50), relator)
        eye = mp.eye(2)
        d1 = max(abs(v) for v in (p - eye))
        d2 = max(abs(v) for v in (p + eye))
        return float(min(d1, d2))


def precise_abs_traces(G: "FuchsianGroupModel", words: Sequence[Sequence[int]], dps: int = 50):
    """|trace| of each word from the exact model at ``dps`` digits, or None without one."""
    if G.exact is None:
        return None
    import mpmath as mp

    with mp.workdps(dps):
        mats = _mp_matrices(G.exact(), dps)
        out = []
        for w in words:
            p = _mp_word(mats, w)
            out.append(abs(p[0, 0] + p[1, 1]))
        return out


# ---------------------------------------------------------------- Bolza


# Opposite-side pairings x1..x4 of the regular octagon (angle pi/4) satisfy
# x1 x4 x3^-1 x2 x1^-1 x4^-1 x3 x2^-1 = 1; standard generators as words in them:
_BOLZA_STANDARD = ((-2, 3, 1), (4, -3, 2), (3,), (-2,))


@lru_cache(maxsize=None)
def bolza_exact():
    """Exact (sympy) matrices of the standard Bolza generators, octagon centred at i."""
    import sympy as sp

    r2 = sp.sqrt(2)
    c = 1 + r2
    s = sp.sqrt(2 + 2 * r2)
    q = sp.sqrt(1 + r2)  # s * sin(pi/4)
    # pairing k translates along the diameter at angle k*pi/4 (Cayley-transformed)
    diag = [s, q, 0, -q]
    off = [0, -q, -s, -q]
    pairings = [
        sp.Matrix([[c + diag[k], off[k]], [off[k], c - diag[k]]]) for k in range(4)
    ]
    inv = {k + 1: m.inv() for k, m in enumerate(pairings)}
    fwd = {k + 1: m for k, m in enumerate(pairings)}
    gens = []
    for word in _BOLZA_STANDARD:
        m = sp.eye(2)
        for x in word:
            m = m * (fwd[x] if x > 0 else inv[-x])
        gens.append(m.applyfunc(lambda e: sp.radsimp(sp.expand(e))))
    return tuple(gens)


@lru_cache(maxsize=None)
def _bolza_float():
    import sympy as sp

    return tuple(
        np.array([[float(sp.N(e, 40)) for e in row] for row in m.tolist()]) for m in bolza_exact()
    )


def bolza_group() -> FuchsianGroupModel:
    gens = tuple(MoebiusElement.from_matrix(m) for m in _bolza_float())
    return FuchsianGroupModel(
        2, gens, {"model": "bolza", "center": [0.0, 1.0]}, exact=bolza_exact
    ).validate()


# ------------------------------------------------------- Fenchel-Nielsen


def pants_matrices(l1: float, l2: float, l3: float):
    """A, B generating a pair of pants with boundary lengths l1, l2, l3 (tr AB < -2).

    Returned as 40-digit mpmath matrices.
    """
    import mpmath as mp

    with mp.workdps(40):
        ep, em = mp.exp(mp.mpf(l1) / 2), mp.exp(-mp.mpf(l1) / 2)
        t_b = 2 * mp.cosh(mp.mpf(l2) / 2)
        t_ab = -2 * mp.cosh(mp.mpf(l3) / 2)
        p = (t_ab - em * t_b) / (ep - em)
        s = t_b - p
        A = mp.matrix([[ep, 0], [0, em]])
        B = mp.matrix([[p, 1], [p * s - 1, s]])
    return A, B


def _mp_axis_transform(m):
    import mpmath as mp

    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    if a + d < 0:
        a, b, c, d = -a, -b, -c, -d
    tr = a + d
    lam = (tr + mp.sqrt(tr * tr - 4)) / 2
    if c == 0:
        finite = b / (d - a)
        if abs(a) > 1:
            g = mp.matrix([[1, finite], [0, 1]])
        else:
            g = mp.matrix([[finite, -1], [1, 0]])
    else:
        x_att, x_rep = (lam - d) / c, (1 / lam - d) / c
        g = mp.matrix([[x_att, x_rep], [1, 1]])
    det = mp.det(g)
    if det < 0:
        g[0, 1], g[1, 1] = -g[0, 1], -g[1, 1]
        det = -det
    return g / mp.sqrt(det)


def fenchel_nielsen_group(lengths: Sequence[float], twists: Sequence[float]) -> FuchsianGroupModel:
    """Genus-2 group glued from two pants along three curves.

    The second pants is the mirror of the first across each cuff, shifted by
    the twist distance along that cuff. Reflections are det -1 matrices acting
    on conj(z); products of two of them are ordinary Moebius maps.
    """
    import mpmath as mp

    lengths = [float(x) for x in lengths]
    twists = [float(x) for x in twists]
    if len(lengths) != 3 or len(twists) != 3:
        raise UnsupportedGenus("only genus-2 Fenchel-Nielsen data (3 lengths, 3 twists) is supported")
    if any(not (x > 0) for x in lengths):
        raise InvalidParameter("Fenchel-Nielsen lengths must be positive", lengths=lengths)
    with mp.workdps(40):
        A, B = pants_matrices(*lengths)
        C = (A * B) ** -1
        rho = []
        for X, t in zip((A, B, C), twists):
            g = _mp_axis_transform(X)
            shift = mp.matrix([[-mp.exp(mp.mpf(t) / 2), 0], [0, mp.exp(-mp.mpf(t) / 2)]])
            rho.append(g * shift * g ** -1)
        t2 = rho[1] * rho[0] ** -1
        t3 = rho[2] * rho[0] ** -1
        raw = [A, B, t2, t3]
        # A t2^-1 B t2 t3^-1 B^-1 A^-1 t3 = 1
        relator = (1, -3, 2, 3, -4, -2, -1, 4)
        forward, _ = W.symplectic_basis(relator, 4)
        std = []
        for w in forward:
            m = mp.eye(2)
            for x in w:
                m = m * (raw[x - 1] if x > 0 else raw[-x - 1] ** -1)
            std.append(m / mp.sqrt(mp.det(m)))
        approx = [np.array(m.tolist(), dtype=float) for m in std]
        center = _balanced_center(approx)
        r = mp.matrix([[1, -center.real], [0, center.imag]]) / mp.sqrt(center.imag)
        ri = r ** -1
        mats = [sign_fix(np.array((r * m * ri).tolist(), dtype=float)) for m in std]
    gens = tuple(MoebiusElement.from_matrix(m) for m in mats)
    prov = {"model": "fenchel-nielsen", "lengths": lengths, "twists": twists}
    return FuchsianGroupModel(2, gens, prov)


def explicit_group(matrices: Sequence[Sequence[float]], relator: Sequence[int] | None = None) -> FuchsianGroupModel:
    mats = [np.asarray(m, dtype=float).reshape(2, 2) for m in matrices]
    if len(mats) % 2 or len(mats) < 4:
        raise UnsupportedGenus("need 2g >= 4 generators", count=len(mats))
    try:
        gens = tuple(MoebiusElement.from_matrix(m) for m in mats)
    except InvalidParameter as exc:
        raise NotASurfaceGroup(str(exc)) from exc
    return FuchsianGroupModel(
        len(mats) // 2, gens, {"model": "explicit"}, tuple(relator or ())
    )


def build_group(spec) -> FuchsianGroupModel:
    """Build a group from ``"bolza"`` or a mapping.

    Mappings use the config keys: ``model`` in {"bolza", "fn", "explicit"},
    ``fn.lengths``/``fn.twists`` (or nested ``fn = {lengths, twists}``),
    ``explicit.matrices``.
    """
    if isinstance(spec, str):
        spec = {"model": spec}
    spec = _flatten(spec)
    model = spec.get("model", "bolza")
    if model == "bolza":
        return bolza_group()
    if model in ("fn", "fenchel-nielsen"):
        if "fn.genus" in spec and int(spec["fn.genus"]) != 2:
            g = int(spec["fn.genus"])
            raise UnsupportedGenus(f"Fenchel-Nielsen construction only for genus 2, got {g}")
        lengths = spec.get("fn.lengths", [2.0, 2.0, 2.0])
        twists = spec.get("fn.twists", [0.0, 0.0, 0.0])
        return fenchel_nielsen_group(lengths, twists).validate()
    if model == "explicit":
        return explicit_group(spec["explicit.matrices"], spec.get("explicit.relator")).validate()
    raise InvalidParameter(f"unknown model {model!r}")


def _flatten(d: Mapping, prefix: str = "") -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, Mapping):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def load_group_config(path) -> Dict[str, Any]:
    """Read the key-value group config (TOML syntax)."""
    try:
        import tomllib  # type: ignore[import-not-found]
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    with open(path, "rb") as fh:
        return _flatten(tomllib.load(fh))
