"""Cubic forms through the four points, their torsor lifts and Weyl images.

Conventions fixed here and used everywhere else:

* cubic monomials Y1^a Y2^b Y3^c are ordered by descending exponent tuple
  (``CUBIC_MONOMIALS``);
* torsor coordinates are ordered a1, a2, a3, a4, a12, a13, a14, a23, a24, a34
  (``COORDS``);
* the twelve anticanonical torsor monomials a_ij a_j a_jk a_k a_kl are the
  Hamiltonian paths i-j-k-l of the complete graph on {1,2,3,4}, normalized by
  i < l and listed in lexicographic order (``PATHS``).

Coefficients are elements of O_K stored as integer pairs (x, y) = x + y*w.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

from .nfield import FieldSpec, RingElem, make_field, ring_gcd, ring_xgcd, unit_normalize

CUBIC_MONOMIALS: tuple[tuple[int, int, int], ...] = (
    (3, 0, 0), (2, 1, 0), (2, 0, 1), (1, 2, 0), (1, 1, 1),
    (1, 0, 2), (0, 3, 0), (0, 2, 1), (0, 1, 2), (0, 0, 3),
)
_MONO_INDEX = {e: i for i, e in enumerate(CUBIC_MONOMIALS)}

COORDS = ("a1", "a2", "a3", "a4", "a12", "a13", "a14", "a23", "a24", "a34")
_EDGES = ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4))


def coord_index(name: str | int | tuple[int, int]) -> int:
    """Index of a_i (int) or a_ij (pair, any order) in ``COORDS``."""
    if isinstance(name, str):
        return COORDS.index(name)
    if isinstance(name, tuple):
        i, j = sorted(name)
        return 4 + _EDGES.index((i, j))
    return name - 1


PATHS: tuple[tuple[int, int, int, int], ...] = tuple(
    p for p in itertools.permutations((1, 2, 3, 4)) if p[0] < p[3]
)


def path_coords(path: Sequence[int]) -> tuple[int, ...]:
    """Coordinate indices of a_ij a_j a_jk a_k a_kl for the path i-j-k-l."""
    i, j, k, l = path
    return tuple(sorted((
        coord_index((i, j)), coord_index(j), coord_index((j, k)),
        coord_index(k), coord_index((k, l)),
    )))


MONOMIAL_COORDS: tuple[tuple[int, ...], ...] = tuple(path_coords(p) for p in PATHS)
_MONOMIAL_LOOKUP = {c: m for m, c in enumerate(MONOMIAL_COORDS)}

# Picard degree of each coordinate in the basis l0..l4
COORD_DEGREES: tuple[tuple[int, ...], ...] = (
    (0, 1, 0, 0, 0), (0, 0, 1, 0, 0), (0, 0, 0, 1, 0), (0, 0, 0, 0, 1),
    *[
        tuple([1] + [-1 if t in e else 0 for t in (1, 2, 3, 4)])
        for e in _EDGES
    ],
)
ANTICANONICAL = (3, -1, -1, -1, -1)

# Substitution recovering a cubic from a torsor form: a_i = 1 and each a_ij
# becomes a linear form in Y, given as coefficients of (Y1, Y2, Y3).
DESCEND_SUBSTITUTION: tuple[tuple[int, int, int], ...] = (
    (0, 0, 0), (0, 0, 0), (0, 0, 0), (0, 0, 0),  # a1..a4 -> 1 (handled apart)
    (0, 0, 1),    # a12 = Y3
    (0, 1, 0),    # a13 = Y2
    (0, 1, -1),   # a14 = Y2 - Y3
    (1, 0, 0),    # a23 = Y1
    (1, 0, -1),   # a24 = Y1 - Y3
    (1, -1, 0),   # a34 = Y1 - Y2
)


class AdmissibilityError(ValueError):
    """A proposed height set fails one of the admissibility checks."""


# ---------------------------------------------------------------------------
# small integer-polynomial helpers (dict: exponent tuple -> int)

def _poly_mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0) + c1 * c2
    return {e: c for e, c in out.items() if c}


def _linear(coeffs: Sequence[int]) -> dict:
    out = {}
    for t, c in enumerate(coeffs):
        if c:
            e = [0, 0, 0]
            e[t] = 1
            out[tuple(e)] = c
    return out


def _to_vector(poly: dict) -> tuple[int, ...]:
    vec = [0] * 10
    for e, c in poly.items():
        vec[_MONO_INDEX[e]] = c
    return tuple(vec)


# ---------------------------------------------------------------------------
# forms

Coeff = tuple[int, int]


def _as_coeff(c) -> Coeff:
    if isinstance(c, RingElem):
        return (c.x, c.y)
    if isinstance(c, (tuple, list)):
        x, y = c
    else:
        x, y = c, 0
    fx, fy = Fraction(x), Fraction(y)
    if fx.denominator != 1 or fy.denominator != 1:
        raise AdmissibilityError(f"coefficient {c!r} is not integral")
    return (int(fx), int(fy))


@dataclass(frozen=True)
class CubicForm:
    """Ten O_K coefficients in ``CUBIC_MONOMIALS`` order."""

    coeffs: tuple[Coeff, ...]

    def __post_init__(self):
        if len(self.coeffs) != 10:
            raise ValueError("a cubic form has 10 coefficients")
        object.__setattr__(self, "coeffs", tuple(_as_coeff(c) for c in self.coeffs))

    @classmethod
    def from_poly(cls, poly: dict) -> "CubicForm":
        return cls(_to_vector(poly))

    def is_rational(self) -> bool:
        return all(y == 0 for _, y in self.coeffs)

    def __neg__(self) -> "CubicForm":
        return CubicForm(tuple((-x, -y) for x, y in self.coeffs))

    def __add__(self, other: "CubicForm") -> "CubicForm":
        return CubicForm(tuple((a + c, b + d) for (a, b), (c, d) in zip(self.coeffs, other.coeffs)))

    def __call__(self, y: Sequence, field: FieldSpec | None = None):
        """Evaluate at a triple of RingElems (or plain ints over Q)."""
        if field is None:
            field = y[0].field if isinstance(y[0], RingElem) else make_field("Q")
        y1, y2, y3 = (field(v) for v in y)
        pw = [[field.one], [field.one], [field.one]]
        for t, v in enumerate((y1, y2, y3)):
            for _ in range(3):
                pw[t].append(pw[t][-1] * v)
        total = field.zero
        for (a, b, c), (cx, cy) in zip(CUBIC_MONOMIALS, self.coeffs):
            if cx == 0 and cy == 0:
                continue
            total = total + field(cx, cy) * pw[0][a] * pw[1][b] * pw[2][c]
        return total

    def eval_int(self, y1: int, y2: int, y3: int) -> int:
        """Fast evaluation for rational coefficients at integer points."""
        return sum(
            cx * y1**a * y2**b * y3**c
            for (a, b, c), (cx, _) in zip(CUBIC_MONOMIALS, self.coeffs)
            if cx
        )

    def vanishing_defects(self) -> list[int]:
        """Indices i (1..4) with P(p_i) != 0."""
        bad = []
        for i, pt in enumerate(((1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1)), start=1):
            sx = sum(cx for e, (cx, cy) in zip(CUBIC_MONOMIALS, self.coeffs)
                     if all(p or not k for p, k in zip(pt, e)))
            sy = sum(cy for e, (cx, cy) in zip(CUBIC_MONOMIALS, self.coeffs)
                     if all(p or not k for p, k in zip(pt, e)))
            if sx or sy:
                bad.append(i)
        return bad

    def to_json(self, rational: bool):
        if rational:
            return [x for x, _ in self.coeffs]
        return [[x, y] for x, y in self.coeffs]


def _Yl(*coeffs: int) -> dict:
    return _linear(coeffs)


def _unit_vec(i: int) -> list[int]:
    v = [0, 0, 0]
    v[i - 1] = 1
    return v


def p_sigma(sigma: Sequence[int]) -> CubicForm:
    """Y_s1 Y_s2 (Y_s1 - Y_s3)."""
    s1, s2, s3 = sigma
    a = _Yl(*_unit_vec(s1))
    b = _Yl(*_unit_vec(s2))
    c = _Yl(*[u - v for u, v in zip(_unit_vec(s1), _unit_vec(s3))])
    return CubicForm.from_poly(_poly_mul(_poly_mul(a, b), c))


def q_sigma(sigma: Sequence[int]) -> CubicForm:
    """Y_s2 (Y_s1 - Y_s2) (Y_s1 - Y_s3)."""
    s1, s2, s3 = sigma
    a = _Yl(*_unit_vec(s2))
    b = _Yl(*[u - v for u, v in zip(_unit_vec(s1), _unit_vec(s2))])
    c = _Yl(*[u - v for u, v in zip(_unit_vec(s1), _unit_vec(s3))])
    return CubicForm.from_poly(_poly_mul(_poly_mul(a, b), c))


SIGMAS: tuple[tuple[int, int, int], ...] = tuple(itertools.permutations((1, 2, 3)))


def standard_forms() -> list[CubicForm]:
    """The six P_sigma (the standard Weil height set)."""
    return [p_sigma(s) for s in SIGMAS]


def symmetric_forms() -> list[CubicForm]:
    """P_sigma and Q_sigma (twelve forms)."""
    return [p_sigma(s) for s in SIGMAS] + [q_sigma(s) for s in SIGMAS]


# ---------------------------------------------------------------------------
# torsor forms

@dataclass(frozen=True)
class TorsorForm:
    """Twelve O_K coefficients on the monomials of ``PATHS``."""

    coeffs: tuple[Coeff, ...]
    multidegree: tuple[int, ...] = ANTICANONICAL

    def __post_init__(self):
        if len(self.coeffs) != 12:
            raise ValueError("a torsor form has 12 coefficients")
        object.__setattr__(self, "coeffs", tuple(_as_coeff(c) for c in self.coeffs))

    @classmethod
    def monomial(cls, m: int, sign: int = 1) -> "TorsorForm":
        c = [(0, 0)] * 12
        c[m] = (sign, 0)
        return cls(tuple(c))

    def __add__(self, other: "TorsorForm") -> "TorsorForm":
        return TorsorForm(tuple((a + c, b + d) for (a, b), (c, d) in zip(self.coeffs, other.coeffs)))

    def support(self) -> list[int]:
        return [m for m, c in enumerate(self.coeffs) if c != (0, 0)]

    def evaluate(self, coords: Sequence[RingElem]) -> RingElem:
        F = coords[0].field
        total = F.zero
        for m, (cx, cy) in enumerate(self.coeffs):
            if cx == 0 and cy == 0:
                continue
            v = F(cx, cy)
            for c in MONOMIAL_COORDS[m]:
                v = v * coords[c]
            total = total + v
        return total

    def as_single_monomial(self) -> tuple[int, int] | None:
        """(m, sign) if this form is +-1 times one monomial."""
        sup = self.support()
        if len(sup) == 1 and self.coeffs[sup[0]] in ((1, 0), (-1, 0)):
            return sup[0], self.coeffs[sup[0]][0]
        return None


@lru_cache(maxsize=None)
def monomial_descent(m: int) -> CubicForm:
    """descend() of the m-th torsor monomial."""
    poly = {(0, 0, 0): 1}
    for c in MONOMIAL_COORDS[m]:
        if c >= 4:
            poly = _poly_mul(poly, _linear(DESCEND_SUBSTITUTION[c]))
    return CubicForm.from_poly(poly)


def descend(T: TorsorForm) -> CubicForm:
    """Substitute a_i = 1 and the linear forms of ``DESCEND_SUBSTITUTION``."""
    if tuple(T.multidegree) != ANTICANONICAL:
        raise ValueError("descend needs anticanonical multidegree")
    acc = [(0, 0)] * 10
    for m, (cx, cy) in enumerate(T.coeffs):
        if cx == 0 and cy == 0:
            continue
        for t, (v, _) in enumerate(monomial_descent(m).coeffs):
            acc[t] = (acc[t][0] + cx * v, acc[t][1] + cy * v)
    return CubicForm(tuple(acc))


def _basis_lift_table() -> list[tuple[int, int]]:
    """For each P_sigma, the (monomial, sign) whose descent is P_sigma."""
    table = []
    for s in SIGMAS:
        target = p_sigma(s)
        hit = None
        for m in range(12):
            d = monomial_descent(m)
            if d == target:
                hit = (m, 1)
            elif d == -target:
                hit = (m, -1)
        if hit is None:  # pragma: no cover - structural
            raise AssertionError(f"no torsor monomial for P_{s}")
        table.append(hit)
    return table


BASIS_LIFTS: tuple[tuple[int, int], ...] = tuple(_basis_lift_table())


def _basis_matrix():
    import sympy as sp

    return sp.Matrix([list(v for v, _ in p_sigma(s).coeffs) for s in SIGMAS]).T  # 10 x 6


def basis_coordinates(P: CubicForm) -> tuple[Coeff, ...]:
    """Coordinates of P in the P_sigma basis (exact, O_K-integral)."""
    import sympy as sp

    A = _basis_matrix()
    out = []
    parts = []
    for part in (0, 1):
        b = sp.Matrix([c[part] for c in P.coeffs])
        try:
            sol, params = A.gauss_jordan_solve(b)
        except ValueError as exc:
            raise AdmissibilityError(f"form {P.coeffs} lies outside the span of the P_sigma") from exc
        if params.shape[0]:  # pragma: no cover - A has full column rank
            raise AssertionError("basis is degenerate")
        parts.append([Fraction(int(v.p), int(v.q)) for v in sol])
    for cx, cy in zip(*parts):
        if cx.denominator != 1 or cy.denominator != 1:
            raise AdmissibilityError(f"form {P.coeffs} has non-integral basis coordinates")
        out.append((int(cx), int(cy)))
    return tuple(out)


def torsor_lift(P: CubicForm) -> TorsorForm:
    """Linear lift: combination of the monomials lifting the P_sigma."""
    coords = basis_coordinates(P)
    acc = [(0, 0)] * 12
    for (cx, cy), (m, sgn) in zip(coords, BASIS_LIFTS):
        acc[m] = (acc[m][0] + sgn * cx, acc[m][1] + sgn * cy)
    return TorsorForm(tuple(acc))


def simplest_lift(P: CubicForm) -> TorsorForm:
    """A single signed monomial when P is one, else ``torsor_lift(P)``.

    Both agree on every torsor solution; the monomial version is cheaper to
    evaluate and gives the sharpest enumeration bounds.
    """
    for m in range(12):
        d = monomial_descent(m)
        if d == P:
            return TorsorForm.monomial(m, 1)
        if d == -P:
            return TorsorForm.monomial(m, -1)
    return torsor_lift(P)


# ---------------------------------------------------------------------------
# Weyl symmetries on the torsor coordinates

def weyl_signed_permutation(i: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(perm, sign) with s_i(x)[c] = sign[c] * x[perm[c]]; i = 0 is the identity."""
    perm = list(range(10))
    sign = [1] * 10
    if i == 0:
        return tuple(perm), tuple(sign)
    j, k, l = (t for t in (1, 2, 3, 4) if t != i)
    for (u, v), w in (((j, k), l), ((j, l), k), ((k, l), j)):
        a, b = coord_index((u, v)), coord_index(w)
        perm[a], perm[b] = b, a
    flip = {1: "a1", 2: "a12", 3: "a34", 4: "a4"}[i]
    sign[COORDS.index(flip)] = -1
    return tuple(perm), tuple(sign)


def apply_weyl_coords(coords: Sequence, i: int) -> list:
    perm, sign = weyl_signed_permutation(i)
    return [coords[perm[c]] if sign[c] > 0 else -coords[perm[c]] for c in range(10)]


@lru_cache(maxsize=None)
def weyl_monomial_action(i: int) -> tuple[tuple[int, int], ...]:
    """For each monomial m: (m', eps) with mon_m(s_i(x)) = eps * mon_m'(x)."""
    perm, sign = weyl_signed_permutation(i)
    out = []
    for cs in MONOMIAL_COORDS:
        image = tuple(sorted(perm[c] for c in cs))
        eps = 1
        for c in cs:
            eps *= sign[c]
        if image not in _MONOMIAL_LOOKUP:  # pragma: no cover - structural
            raise AssertionError(f"s_{i} does not permute torsor monomials")
        out.append((_MONOMIAL_LOOKUP[image], eps))
    return tuple(out)


def weyl_torsor_form(T: TorsorForm, i: int) -> TorsorForm:
    """The form x -> T(s_i(x))."""
    acc = [(0, 0)] * 12
    for m, (cx, cy) in enumerate(T.coeffs):
        if cx == 0 and cy == 0:
            continue
        m2, eps = weyl_monomial_action(i)[m]
        acc[m2] = (acc[m2][0] + eps * cx, acc[m2][1] + eps * cy)
    return TorsorForm(tuple(acc))


# ---------------------------------------------------------------------------
# height specs

@dataclass
class HeightSpec:
    """A validated admissible set of cubics over a fixed field."""

    forms: tuple[CubicForm, ...]
    field: FieldSpec
    lifts: tuple[TorsorForm, ...]
    basis_coords: tuple[tuple[Coeff, ...], ...]
    name: str = ""
    weyl_index: int = 0
    _weyl_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def spec_hash(self) -> str:
        payload = json.dumps([f.to_json(False) for f in self.forms], separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()[:12]

    def __len__(self) -> int:
        return len(self.forms)

    def height_of_values(self, values: Sequence[RingElem]) -> int:
        return max(v.absnorm() for v in values)

    def monomial_constants(self) -> tuple[Fraction, ...]:
        return _monomial_constants(self)

    def c_p(self) -> Fraction:
        """C_P: every monomial is bounded by C_P * B on points of height <= B."""
        return max(self.monomial_constants())

    def monomial_bounds(self, B) -> tuple[int, ...]:
        """floor(C_m * B) for each of the twelve monomials (B may be rational)."""
        Bq = Fraction(B)
        return tuple(math.floor(c * Bq) for c in self.monomial_constants())

    def lift_matrix(self) -> tuple[list[list[Coeff]], int]:
        """Integer lift coefficients (members x 12) and their common scale 1."""
        return [list(t.coeffs) for t in self.lifts], 1

    def same_up_to_signs(self, other: "HeightSpec") -> bool:
        mine = {_sign_key(f) for f in self.forms}
        theirs = {_sign_key(f) for f in other.forms}
        return mine == theirs

    def to_json(self) -> list:
        rational = all(f.is_rational() for f in self.forms)
        return [f.to_json(rational) for f in self.forms]


def _sign_key(f: CubicForm) -> tuple:
    return max(f.coeffs, (-f).coeffs)


def _rank_over_field(rows: list[tuple[Coeff, ...]], F: FieldSpec) -> int:
    import sympy as sp
    from sympy.polys.matrices import DomainMatrix

    if F.degree == 1:
        M = sp.Matrix([[c[0] for c in r] for r in rows])
        return M.rank()
    root = sp.sqrt(F.d)
    w = root if F.trace == 0 else (1 + root) / 2
    dom = sp.QQ.algebraic_field(root)
    data = [[dom.from_sympy(sp.nsimplify(cx + cy * w)) for cx, cy in r] for r in rows]
    return DomainMatrix(data, (len(rows), len(rows[0])), dom).rank()


def _fold_gcd(vals: Iterable[RingElem]) -> RingElem | None:
    g = None
    for v in vals:
        if v.is_zero():
            continue
        g = v if g is None else ring_gcd(g, v)
    return None if g is None else unit_normalize(g)


def gcd_identity_holds(forms: Sequence[CubicForm], y: Sequence[RingElem]) -> bool | None:
    """Check the value-gcd identity at y; None when undefined (a zero gcd)."""
    y1, y2, y3 = y
    pairs = ((y2, y3), (y1, y3), (y1, y2), (y1 - y2, y1 - y3))
    if any(a.is_zero() and b.is_zero() for a, b in pairs):
        return None
    F = y1.field
    rhs = F.one
    for a, b in pairs:
        rhs = rhs * ring_gcd(a, b)
    g3 = _fold_gcd((y1, y2, y3))
    rhs = rhs // g3
    lhs = _fold_gcd(P(y, F) for P in forms)
    if lhs is None:
        return False
    return unit_normalize(rhs) == lhs


def random_element(F: FieldSpec, rng: random.Random, bound: int) -> RingElem:
    """A uniformly random nonzero element with coordinates in [-bound, bound]."""
    while True:
        x = rng.randint(-bound, bound)
        y = rng.randint(-bound, bound) if F.degree == 2 else 0
        if x or y:
            return F(x, y)


def _mod_inverse(a: RingElem, m: RingElem) -> RingElem:
    g, s, _ = ring_xgcd(a, m)
    if not g.is_unit():
        raise ArithmeticError("not invertible")
    return s * unit_inverse(g)


def unit_inverse(u: RingElem) -> RingElem:
    for v in u.field.unit_elems():
        if (u * v) == 1:
            return v
    raise ArithmeticError(f"{u} is not a unit")


def stress_triples(F: FieldSpec, count: int, seed: int = 0, max_norm: int = 1000) -> list[tuple[RingElem, ...]]:
    """Triples with engineered large pairwise gcds (up to ``max_norm``).

    Built from random torsor solutions: y = (a2 a3 a23, a1 a3 a13, a1 a2 a12)
    has gcd(y2, y3) divisible by a1 and so on, and y1 - y2 divisible by a4.
    """
    rng = random.Random(seed)
    coord_bound = max_norm if F.degree == 1 else max(2, math.isqrt(max_norm))
    out: list[tuple[RingElem, ...]] = [
        (F(6), F(10), F(15)),
        (F(30), F(42), F(70)),
        (F(2 * 3 * 5), F(2 * 3 * 7), F(2 * 3 * 11)),
    ]
    while len(out) < count:
        a = [random_element(F, rng, coord_bound) for _ in range(4)]
        if any(ring_gcd(a[i], a[j]).absnorm() != 1 for i in range(4) for j in range(i + 1, 4)):
            continue
        a1, a2, a3, a4 = a
        a12 = random_element(F, rng, coord_bound)
        r23 = a1 * _mod_inverse(a3, a4) * a12 if not a4.is_unit() else F.zero
        a23 = r23 + a4 * random_element(F, rng, 3)
        r34 = a2 * _mod_inverse(a4, a1) * a23 if not a1.is_unit() else F.zero
        a34 = r34 + a1 * random_element(F, rng, 3)
        a13 = (a2 * a23 - a4 * a34).exact_div(a1)
        if a13 is None:  # pragma: no cover - guaranteed by the congruences
            continue
        y = (a2 * a3 * a23, a1 * a3 * a13, a1 * a2 * a12)
        if rng.random() < 0.2:
            lam = random_element(F, rng, 5)
            y = tuple(lam * v for v in y)
        if any(v.is_zero() for v in y):
            continue
        out.append(y)
    return out[:count]


def validate_admissible(
    forms: Sequence[CubicForm],
    field: FieldSpec | str,
    samples: int = 200,
    seed: int = 0,
    stress: int = 50,
    name: str = "",
    lifts: Sequence[TorsorForm] | None = None,
) -> HeightSpec:
    """Check integrality, vanishing, rank and the gcd identity; build the HeightSpec."""
    F = make_field(field) if isinstance(field, str) else field
    forms = tuple(f if isinstance(f, CubicForm) else CubicForm(tuple(f)) for f in forms)
    if not forms:
        raise AdmissibilityError("empty height set")
    if F.degree == 1 and not all(f.is_rational() for f in forms):
        raise AdmissibilityError("non-rational coefficient over Q")
    for n, f in enumerate(forms):
        bad = f.vanishing_defects()
        if bad:
            raise AdmissibilityError(f"member {n} does not vanish at p_{bad[0]}")
    coords = tuple(basis_coordinates(f) for f in forms)
    rank = _rank_over_field(list(coords), F)
    if rank < 6:
        raise AdmissibilityError(f"height set has rank {rank} < 6")
    rng = random.Random(seed)
    triples = [
        tuple(random_element(F, rng, 60 if F.degree == 1 else 12) for _ in range(3))
        for _ in range(samples)
    ]
    triples += stress_triples(F, stress, seed=seed)
    for y in triples:
        ok = gcd_identity_holds(forms, y)
        if ok is False:
            raise AdmissibilityError(f"gcd identity fails at y = {y}")
    if lifts is None:
        lifts = tuple(simplest_lift(f) for f in forms)
    else:
        lifts = tuple(lifts)
        for f, t in zip(forms, lifts):
            if descend(t) != f:
                raise AdmissibilityError("supplied lift does not descend to its form")
    return HeightSpec(forms=forms, field=F, lifts=lifts, basis_coords=coords, name=name)


def weyl_height_spec(H: HeightSpec, s: int, samples: int = 50) -> HeightSpec:
    """P^(s): the members whose lifts are x -> P~(s(x)); cached per spec."""
    if s == 0:
        return H
    if s in H._weyl_cache:
        return H._weyl_cache[s]
    lifts = tuple(weyl_torsor_form(t, s) for t in H.lifts)
    forms = tuple(descend(t) for t in lifts)
    try:
        out = validate_admissible(
            forms, H.field, samples=samples, stress=20,
            name=f"{H.name}^(s{s})", lifts=lifts,
        )
    except AdmissibilityError as exc:  # pragma: no cover - would be a bug
        raise AssertionError(f"Weyl image s_{s} of {H.name} is not admissible: {exc}") from exc
    out.weyl_index = s
    H._weyl_cache[s] = out
    return out


def _abs_upper(c: Coeff, F: FieldSpec) -> Fraction:
    """A rational upper bound for the complex absolute value of c."""
    if F.degree == 1:
        return Fraction(abs(c[0]))
    n = F(c[0], c[1]).absnorm()
    r = math.isqrt(n)
    if r * r == n:
        return Fraction(r)
    scale = 10**6
    return Fraction(math.isqrt(n * scale * scale) + 1, scale)


def _monomial_constants(H: HeightSpec) -> tuple[Fraction, ...]:
    cache = H._weyl_cache.setdefault("_consts", None)
    if cache is not None:
        return cache
    import sympy as sp

    F = H.field
    members = [f for f in H.forms]
    keys = {}
    for f in members:
        keys[f] = True
        keys[-f] = True
    # a basis of members for exact representations
    basis_idx: list[int] = []
    for n in range(len(members)):
        trial = basis_idx + [n]
        if _rank_over_field([H.basis_coords[t] for t in trial], F) == len(trial):
            basis_idx = trial
        if len(basis_idx) == 6:
            break
    consts = []
    for m in range(12):
        target = monomial_descent(m)
        if target in keys:
            consts.append(Fraction(1))
            continue
        # solve target = sum c_n P_n over the basis members (per coordinate part)
        A = sp.Matrix([[H.basis_coords[n][t][0] for n in basis_idx] for t in range(6)])
        Ay = sp.Matrix([[H.basis_coords[n][t][1] for n in basis_idx] for t in range(6)])
        tgt = basis_coordinates(target)
        c = _solve_in_field(A, Ay, [v for v, _ in tgt], F)
        total = sum((_abs_upper_frac(ci, F) for ci in c), Fraction(0))
        consts.append(total if F.degree == 1 else total * total)
    out = tuple(consts)
    H._weyl_cache["_consts"] = out
    return out


def _solve_in_field(A, Ay, rhs, F: FieldSpec):
    """Solve (A + w*Ay) c = rhs over K; returns c as (Fraction, Fraction) pairs."""
    import sympy as sp

    if F.degree == 1 or Ay.is_zero_matrix:
        sol = A.LUsolve(sp.Matrix(rhs))
        return [(Fraction(int(v.p), int(v.q)), Fraction(0)) for v in sol]
    root = sp.sqrt(F.d)
    w = root if F.trace == 0 else (1 + root) / 2
    M = A + w * Ay
    sol = M.LUsolve(sp.Matrix(rhs))
    out = []
    for v in sol:
        v = sp.nsimplify(sp.expand(v))
        # v = p + q*w  with rational p, q
        q = sp.Rational(sp.im(v) / sp.im(w))
        p = sp.Rational(sp.re(v) - q * sp.re(w))
        out.append((Fraction(int(p.p), int(p.q)), Fraction(int(q.p), int(q.q))))
    return out


def _abs_upper_frac(c: tuple[Fraction, Fraction], F: FieldSpec) -> Fraction:
    cx, cy = c
    if F.degree == 1:
        return abs(cx)
    den = math.lcm(cx.denominator, cy.denominator)
    num = _abs_upper((int(cx * den), int(cy * den)), F)
    return num / den


# ---------------------------------------------------------------------------
# canonical sets and JSON files

def standard_spec(field: FieldSpec | str = "Q", **kw) -> HeightSpec:
    return validate_admissible(standard_forms(), field, name="std6", **kw)


def symmetric_spec(field: FieldSpec | str = "Q", **kw) -> HeightSpec:
    return validate_admissible(symmetric_forms(), field, name="sym12", **kw)


def canonical_spec(name: str, field: FieldSpec | str = "Q", **kw) -> HeightSpec:
    if name in ("std6", "standard"):
        return standard_spec(field, **kw)
    if name in ("sym12", "symmetric"):
        return symmetric_spec(field, **kw)
    raise KeyError(name)


def load_height_spec(path: str | Path, field: FieldSpec | str, **kw) -> HeightSpec:
    """Load a JSON list of members (10 ints or 10 int pairs each) and validate it."""
    p = Path(path)
    data = json.loads(p.read_text())
    if isinstance(data, dict):
        data = data["members"]
    forms = []
    for n, row in enumerate(data):
        if not isinstance(row, list) or len(row) != 10:
            raise AdmissibilityError(f"member {n}: expected 10 coefficients")
        forms.append(CubicForm(tuple(tuple(c) if isinstance(c, list) else c for c in row)))
    return validate_admissible(forms, field, name=p.stem, **kw)


def dump_height_spec(forms: Sequence[CubicForm], path: str | Path) -> None:
    rational = all(f.is_rational() for f in forms)
    Path(path).write_text(json.dumps([f.to_json(rational) for f in forms]) + "\n")
