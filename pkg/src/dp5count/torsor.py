"""Points on the universal torsor and their relation to points of the surface."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .cubics import COORDS, HeightSpec, apply_weyl_coords, coord_index
from .nfield import FieldSpec, RingElem, make_field, ring_gcd, unit_normalize

__all__ = [
    "TorsorPoint",
    "SurfacePoint",
    "SymClass",
    "WStats",
    "CompletionError",
    "CongruenceFailure",
    "ZeroCoordinate",
    "OnLines",
    "plucker_residues",
    "complete_dependent",
    "coprimality_check",
    "height_torsor",
    "height_surface",
    "to_surface_point",
    "from_surface_point",
    "normalize_plane_point",
    "sym_quantities",
    "apply_s",
    "is_canonical",
    "is_canonical_n",
    "w_stats",
    "COPRIME_PAIRS",
]


class CompletionError(ArithmeticError):
    pass


class CongruenceFailure(CompletionError):
    """No integral completion: one of the two congruences fails."""


class ZeroCoordinate(CompletionError):
    """The completion exists but has a vanishing coordinate."""


class OnLines(ValueError):
    """A point of the plane lying on one of the six lines."""


def _pairs_of_coprimality() -> tuple[tuple[int, int], ...]:
    out = []
    idx = coord_index
    for i in range(1, 5):
        for j in range(i + 1, 5):
            out.append((idx(i), idx(j)))
    for i in range(1, 5):
        others = [t for t in range(1, 5) if t != i]
        for a in range(3):
            for b in range(a + 1, 3):
                out.append((idx(i), idx((others[a], others[b]))))
    edges = [(i, j) for i in range(1, 5) for j in range(i + 1, 5)]
    for i in range(1, 5):
        # pairs a_ij, a_ik sharing the index i
        star = [e for e in edges if i in e]
        for a in range(3):
            for b in range(a + 1, 3):
                out.append((idx(star[a]), idx(star[b])))
    return tuple(out)


# 6 (a_i, a_j) + 12 (a_i, a_jk) + 12 (a_ij, a_ik) coordinate-index pairs
COPRIME_PAIRS = _pairs_of_coprimality()


@dataclass(frozen=True)
class TorsorPoint:
    """The ten coordinates in ``COORDS`` order."""

    coords: tuple[RingElem, ...]

    def __post_init__(self):
        if len(self.coords) != 10:
            raise ValueError("a torsor point has ten coordinates")

    @classmethod
    def of(cls, field: FieldSpec | str, values: Sequence) -> "TorsorPoint":
        F = make_field(field) if isinstance(field, str) else field
        return cls(tuple(F(v) for v in values))

    @property
    def field(self) -> FieldSpec:
        return self.coords[0].field

    def __getattr__(self, name: str):
        if name in COORDS:
            return self.coords[COORDS.index(name)]
        raise AttributeError(name)

    def key(self) -> tuple:
        return tuple(c.key() for c in self.coords)

    def dump(self) -> str:
        """Debug line: ten exact integer pairs in coordinate order."""
        return " ".join(f"{c.x},{c.y}" for c in self.coords)


def plucker_residues(T: TorsorPoint) -> tuple[RingElem, ...]:
    a1, a2, a3, a4, a12, a13, a14, a23, a24, a34 = T.coords
    return (
        a4 * a14 - a3 * a13 + a2 * a12,
        a4 * a24 - a3 * a23 + a1 * a12,
        a4 * a34 - a2 * a23 + a1 * a13,
        a3 * a34 - a2 * a24 + a1 * a14,
        a12 * a34 - a13 * a24 + a23 * a14,
    )


def complete_dependent(
    aprime: Sequence[RingElem], a12: RingElem, a23: RingElem, a34: RingElem
) -> TorsorPoint:
    """Solve the torsor equations for a13, a24, a14."""
    a1, a2, a3, a4 = aprime
    if any(v.is_zero() for v in (a1, a2, a3, a4, a12, a23, a34)):
        raise ZeroCoordinate("inputs must be nonzero")
    a24 = (a3 * a23 - a1 * a12).exact_div(a4)
    if a24 is None:
        raise CongruenceFailure("a3*a23 != a1*a12 mod a4")
    a13 = (a2 * a23 - a4 * a34).exact_div(a1)
    if a13 is None:
        raise CongruenceFailure("a4*a34 != a2*a23 mod a1")
    a14 = (a2 * a3 * a23 - a3 * a4 * a34 - a1 * a2 * a12).exact_div(a1 * a4)
    if a14 is None:  # pragma: no cover - implied by the two congruences when (a1, a4) = 1
        raise CongruenceFailure("a14 not integral")
    if a13.is_zero() or a24.is_zero() or a14.is_zero():
        raise ZeroCoordinate("a derived coordinate vanishes")
    return TorsorPoint((a1, a2, a3, a4, a12, a13, a14, a23, a24, a34))


def coprimality_check(T: TorsorPoint) -> bool:
    c = T.coords
    for u, v in COPRIME_PAIRS:
        a, b = c[u], c[v]
        if math.gcd(a.absnorm(), b.absnorm()) == 1:
            continue
        if ring_gcd(a, b).absnorm() != 1:
            return False
    return True


def height_torsor(T: TorsorPoint, H: HeightSpec) -> int:
    """max over P of |N(P~(T))|; the anticanonical height when T is coprime."""
    return max(t.evaluate(T.coords).absnorm() for t in H.lifts)


@dataclass(frozen=True)
class SurfacePoint:
    y: tuple[RingElem, RingElem, RingElem]
    in_V: bool

    @classmethod
    def of(cls, field: FieldSpec | str, y: Sequence) -> "SurfacePoint":
        F = make_field(field) if isinstance(field, str) else field
        return normalize_plane_point([F(v) for v in y])

    def key(self) -> tuple:
        return tuple(v.key() for v in self.y)


def _line_flag(y: Sequence[RingElem]) -> bool:
    y1, y2, y3 = y
    return not (y1.is_zero() or y2.is_zero() or y3.is_zero() or y1 == y2 or y1 == y3 or y2 == y3)


def normalize_plane_point(y: Sequence[RingElem]) -> SurfacePoint:
    """Primitive representative, the lexicographically largest under units."""
    y = list(y)
    g = None
    for v in y:
        if not v.is_zero():
            g = v if g is None else ring_gcd(g, v)
    if g is None:
        raise ValueError("zero vector")
    y = [v // g for v in y]
    F = y[0].field
    best = None
    for u in F.unit_elems():
        cand = tuple(u * v for v in y)
        k = tuple(c.key() for c in cand)
        if best is None or k > best[0]:
            best = (k, cand)
    cand = best[1]
    return SurfacePoint(cand, _line_flag(cand))


def to_surface_point(T: TorsorPoint) -> SurfacePoint:
    a1, a2, a3, a4, a12, a13, a14, a23, a24, a34 = T.coords
    return normalize_plane_point((a2 * a3 * a23, a1 * a3 * a13, a1 * a2 * a12))


def from_surface_point(y: Sequence | SurfacePoint, field: FieldSpec | str | None = None) -> TorsorPoint:
    """The torsor point above y with a1..a4 unit-normalized."""
    if isinstance(y, SurfacePoint):
        y = y.y
    if field is None:
        field = y[0].field if isinstance(y[0], RingElem) else "Q"
    F = make_field(field) if isinstance(field, str) else field
    pt = normalize_plane_point([F(v) for v in y])
    if not pt.in_V:
        raise OnLines(f"{tuple(pt.y)} lies on one of the six lines")
    y1, y2, y3 = pt.y
    a1 = ring_gcd(y2, y3)
    a2 = ring_gcd(y1, y3)
    a3 = ring_gcd(y1, y2)
    a4 = ring_gcd(y1 - y2, y1 - y3)
    a23 = y1 // (a2 * a3)
    a12 = y3 // (a1 * a2)
    # a3 a4 a34 = y1 - y2 holds on the torsor, which pins a34 for any unit
    # choice of a4, so no search over unit normalizations is needed.
    a34 = (y1 - y2) // (a3 * a4)
    return complete_dependent((a1, a2, a3, a4), a12, a23, a34)


def height_surface(y: Sequence[RingElem], H: HeightSpec) -> int:
    """H(y) from the value-gcd identity, independent of the torsor model.

    Over fields with one archimedean place the height of a primitive y is
    max_P |N(P(y))| / N(gcd_P P(y)), and the admissibility identity gives the
    gcd as a product of four pairwise gcds.
    """
    y1, y2, y3 = y
    F = y1.field
    g = ring_gcd(y2, y3) * ring_gcd(y1, y3) * ring_gcd(y1, y2) * ring_gcd(y1 - y2, y1 - y3)
    num = max(P(y, F).absnorm() for P in H.forms)
    q, r = divmod(num, g.absnorm())
    if r:
        raise ArithmeticError("gcd identity violated")
    return q


@dataclass(frozen=True)
class SymClass:
    n: tuple[int, int, int, int, int]

    @property
    def m(self) -> int:
        """Smallest index attaining the minimum."""
        lo = min(self.n)
        return self.n.index(lo)


def sym_quantities(T: TorsorPoint) -> SymClass:
    c = T.coords
    N = [v.absnorm() for v in c]
    n0 = N[0] * N[1] * N[2] * N[3]
    ns = [n0]
    for i in range(1, 5):
        j, k, l = (t for t in range(1, 5) if t != i)
        ns.append(N[i - 1] * N[coord_index((j, k))] * N[coord_index((j, l))] * N[coord_index((k, l))])
    return SymClass(tuple(ns))


def apply_s(T: TorsorPoint, i: int) -> TorsorPoint:
    return TorsorPoint(tuple(apply_weyl_coords(T.coords, i)))


def is_canonical_n(n: Sequence[int], m: int) -> bool:
    n0 = n[0]
    return all(n0 <= n[j] for j in range(1, 5)) and all(n0 < n[j] for j in range(1, m + 1))


def is_canonical(T: TorsorPoint, m: int) -> bool:
    return is_canonical_n(sym_quantities(T).n, m)


@dataclass(frozen=True)
class WStats:
    B_ij: tuple[float, ...]  # in edge order a12, a13, a14, a23, a24, a34
    ratios: tuple[float, ...]
    W_max: float


def w_stats(T: TorsorPoint, B: float) -> WStats:
    """Edge sizes relative to their typical sizes (B n0)^(1/3) / |N(a_i a_j)|."""
    c = T.coords
    N = [v.absnorm() for v in c]
    n0 = N[0] * N[1] * N[2] * N[3]
    base = (float(B) * n0) ** (1.0 / 3.0)
    d = T.field.degree
    bij, ratios = [], []
    for (i, j), idx in zip(((1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)), range(4, 10)):
        b = base / (N[i - 1] * N[j - 1])
        bij.append(b)
        ratios.append(N[idx] / b)
    return WStats(tuple(bij), tuple(ratios), max(ratios) ** (1.0 / d))
