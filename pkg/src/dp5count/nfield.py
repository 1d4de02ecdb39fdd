"""Exact arithmetic in the rings of integers of the supported base fields.

Supported: Q and the norm-Euclidean imaginary quadratic fields Q(sqrt d),
d in {-1, -2, -3, -7, -11}.  All have class number one, a finite unit group
and a single archimedean place.

Elements of O_K are stored as integer pairs (x, y) meaning x + y*w in the
integral basis (1, w), with w = sqrt(d) for d = -1, -2 and w = (1 + sqrt(d))/2
otherwise.  The minimal polynomial of w is X^2 - T*X + M.  Over Q the pair is
(n, 0).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "FieldSpec",
    "Place",
    "RingElem",
    "IdealRep",
    "UnsupportedField",
    "make_field",
    "ring_gcd",
    "unit_normalize",
    "primes_up_to",
    "prime_ideal_norms",
    "rational_primes",
    "factor",
    "squarefree_divisors",
    "elements_up_to",
    "LABELS",
]


class UnsupportedField(ValueError):
    """Raised for fields outside the supported list."""


@dataclass(frozen=True)
class Place:
    """The archimedean place: local degree and the image of w."""

    local_degree: int
    kind: str  # "real" | "complex"
    omega_image: complex


@dataclass(frozen=True)
class FieldSpec:
    label: str
    d: int
    degree: int
    signature: tuple[int, int]
    disc: int
    class_number: int
    units: tuple[tuple[int, int], ...]
    regulator: float
    rho: float
    places: tuple[Place, ...]
    trace: int
    mconst: int

    @property
    def n_units(self) -> int:
        return len(self.units)

    @property
    def is_rational(self) -> bool:
        return self.degree == 1

    def elem(self, x: int, y: int = 0) -> "RingElem":
        return RingElem(x, y, self)

    def __call__(self, x, y: int = 0) -> "RingElem":
        if isinstance(x, RingElem):
            return x
        if isinstance(x, tuple):
            return RingElem(int(x[0]), int(x[1]), self)
        return RingElem(int(x), int(y), self)

    @property
    def zero(self) -> "RingElem":
        return RingElem(0, 0, self)

    @property
    def one(self) -> "RingElem":
        return RingElem(1, 0, self)

    def unit_elems(self) -> list["RingElem"]:
        return [RingElem(u[0], u[1], self) for u in self.units]

    def rho_from_invariants(self) -> float:
        r1, r2 = self.signature
        return (
            2**r1 * (2 * math.pi) ** r2 * self.regulator * self.class_number
            / (len(self.units) * math.sqrt(abs(self.disc)))
        )

    def kernel_params(self) -> tuple[int, int, int]:
        """(degree, T, M) as consumed by the numba kernels."""
        return self.degree, self.trace, self.mconst


# label -> (d, disc, T, M, units)
_FIELDS = {
    "Q": (1, 1, 0, 0, ((1, 0), (-1, 0))),
    "Q(i)": (-1, -4, 0, 1, ((1, 0), (0, 1), (-1, 0), (0, -1))),
    "Q(sqrt-2)": (-2, -8, 0, 2, ((1, 0), (-1, 0))),
    "Q(sqrt-3)": (-3, -3, 1, 1, ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))),
    "Q(sqrt-7)": (-7, -7, 1, 2, ((1, 0), (-1, 0))),
    "Q(sqrt-11)": (-11, -11, 1, 3, ((1, 0), (-1, 0))),
}

LABELS = tuple(_FIELDS)

_ALIASES = {
    "q": "Q",
    "rationals": "Q",
    "q(i)": "Q(i)",
    "qi": "Q(i)",
    "q(sqrt-1)": "Q(i)",
    "gaussian": "Q(i)",
    "eisenstein": "Q(sqrt-3)",
}


def _canonical_label(label: str) -> str:
    s = label.strip().replace(" ", "").replace("√", "sqrt").replace("−", "-")
    s = s.replace("sqrt(", "sqrt").replace(")", "").replace("(", "")
    # s now looks like "Qsqrt-3", "Qi", "Q"
    key = s.lower()
    if key in _ALIASES:
        return _ALIASES[key]
    for canon in _FIELDS:
        flat = canon.replace("(", "").replace(")", "").lower()
        if key == flat:
            return canon
    if key.startswith("qsqrt"):
        try:
            d = int(key[5:])
        except ValueError:
            pass
        else:
            for canon, spec in _FIELDS.items():
                if spec[0] == d:
                    return canon
    raise UnsupportedField(
        f"unsupported field {label!r}; supported: {', '.join(LABELS)} "
        "(class number one, finite unit group, one archimedean place)"
    )


@lru_cache(maxsize=None)
def make_field(label: str) -> FieldSpec:
    """Build the FieldSpec for one of the supported labels."""
    canon = _canonical_label(label)
    d, disc, T, M, units = _FIELDS[canon]
    if d == 1:
        degree, signature = 1, (1, 0)
        place = Place(1, "real", complex(0.0))
    else:
        degree, signature = 2, (0, 1)
        root = cmath.sqrt(d)
        w = root if T == 0 else (1 + root) / 2
        place = Place(2, "complex", w)
    r1, r2 = signature
    rho = 2**r1 * (2 * math.pi) ** r2 / (len(units) * math.sqrt(abs(disc)))
    return FieldSpec(
        label=canon,
        d=d,
        degree=degree,
        signature=signature,
        disc=disc,
        class_number=1,
        units=units,
        regulator=1.0,
        rho=rho,
        places=(place,),
        trace=T,
        mconst=M,
    )


class RingElem:
    """An element x + y*w of O_K."""

    __slots__ = ("x", "y", "field")

    def __init__(self, x: int, y: int, field: FieldSpec):
        if field.degree == 1 and y:
            raise ValueError("rational integers have y = 0")
        self.x = x
        self.y = y
        self.field = field

    # -- coercion -----------------------------------------------------------
    def _coerce(self, other) -> "RingElem":
        if isinstance(other, RingElem):
            if other.field.label != self.field.label:
                raise TypeError("elements of different fields")
            return other
        if isinstance(other, (int, np.integer)):
            return RingElem(int(other), 0, self.field)
        return NotImplemented

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return RingElem(self.x + o.x, self.y + o.y, self.field)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return RingElem(self.x - o.x, self.y - o.y, self.field)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __neg__(self):
        return RingElem(-self.x, -self.y, self.field)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        T, M = self.field.trace, self.field.mconst
        a, b, c, d = self.x, self.y, o.x, o.y
        return RingElem(a * c - M * b * d, a * d + b * c + T * b * d, self.field)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = self.field.one
        for _ in range(n):
            out = out * self
        return out

    def conj(self) -> "RingElem":
        return RingElem(self.x + self.field.trace * self.y, -self.y, self.field)

    def norm(self) -> int:
        """Field norm N_{K/Q}; over Q this is the integer itself."""
        if self.field.degree == 1:
            return self.x
        T, M = self.field.trace, self.field.mconst
        return self.x * self.x + T * self.x * self.y + M * self.y * self.y

    def absnorm(self) -> int:
        """|N(a)|, which equals |a|_v at the unique archimedean place."""
        return abs(self.norm())

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    def is_unit(self) -> bool:
        return self.absnorm() == 1

    def exact_div(self, other) -> "RingElem | None":
        """self / other if it lies in O_K, else None."""
        o = self._coerce(other)
        if o.is_zero():
            raise ZeroDivisionError("division by zero in O_K")
        if self.field.degree == 1:
            q, r = divmod(self.x, o.x)
            return RingElem(q, 0, self.field) if r == 0 else None
        num = self * o.conj()
        n = o.norm()
        if num.x % n or num.y % n:
            return None
        return RingElem(num.x // n, num.y // n, self.field)

    def __floordiv__(self, other) -> "RingElem":
        q = self.exact_div(other)
        if q is None:
            raise ArithmeticError(f"{other} does not divide {self}")
        return q

    def divides(self, other) -> bool:
        o = self._coerce(other)
        if self.is_zero():
            return o.is_zero()
        return o.exact_div(self) is not None

    def euclid_divmod(self, other) -> tuple["RingElem", "RingElem"]:
        """Quotient and remainder with N(r) < N(other)."""
        o = self._coerce(other)
        if o.is_zero():
            raise ZeroDivisionError("division by zero in O_K")
        if self.field.degree == 1:
            q = _round_div(self.x, o.x)
            return RingElem(q, 0, self.field), RingElem(self.x - q * o.x, 0, self.field)
        T = self.field.trace
        num = self * o.conj()
        n = o.norm()
        qy = _round_div(num.y, n)
        # centre the 1-coordinate on the real part of the fractional error
        qx = _round_div(2 * num.x + T * (num.y - qy * n), 2 * n)
        q = RingElem(qx, qy, self.field)
        return q, self - q * o

    # -- comparison / display ----------------------------------------------
    def key(self) -> tuple[int, int]:
        return (self.x, self.y)

    def __eq__(self, other):
        if isinstance(other, RingElem):
            return self.field.label == other.field.label and self.x == other.x and self.y == other.y
        if isinstance(other, (int, np.integer)):
            return self.y == 0 and self.x == int(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.field.label, self.x, self.y))

    def __int__(self):
        if self.y:
            raise TypeError("not a rational integer")
        return self.x

    def __repr__(self):
        if self.field.degree == 1:
            return str(self.x)
        return f"({self.x}{self.y:+d}w)"

    def to_complex(self) -> complex:
        w = self.field.places[0].omega_image
        return self.x + self.y * w


def _round_div(a: int, b: int) -> int:
    """Nearest integer to a/b, ties upward, exact."""
    if b < 0:
        a, b = -a, -b
    return (2 * a + b) // (2 * b)


# -- units and gcd ----------------------------------------------------------

def unit_normalize(a: RingElem) -> RingElem:
    """Canonical associate: lexicographically largest (x, y) in the unit orbit."""
    if a.is_zero():
        raise ValueError("cannot normalize zero")
    best = None
    for u in a.field.unit_elems():
        c = u * a
        if best is None or c.key() > best.key():
            best = c
    return best


def associates(a: RingElem) -> list[RingElem]:
    return [u * a for u in a.field.unit_elems()]


def ring_gcd(a: RingElem, b: RingElem) -> RingElem:
    """Unit-normalized generator of a*O_K + b*O_K (norm-Euclidean algorithm)."""
    if not isinstance(a, RingElem):
        a = b.field(a)
    if not isinstance(b, RingElem):
        b = a.field(b)
    if a.is_zero() and b.is_zero():
        raise ValueError("gcd(0, 0) is undefined")
    while not b.is_zero():
        _, r = a.euclid_divmod(b)
        a, b = b, r
    return unit_normalize(a)


def ring_xgcd(a: RingElem, b: RingElem) -> tuple[RingElem, RingElem, RingElem]:
    """(g, s, t) with s*a + t*b = g, g a (non-normalized) generator of (a, b)."""
    F = a.field
    r0, r1 = a, b
    s0, s1 = F.one, F.zero
    t0, t1 = F.zero, F.one
    while not r1.is_zero():
        q, r = r0.euclid_divmod(r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    return r0, s0, t0


def coprime(a: RingElem, b: RingElem) -> bool:
    return ring_gcd(a, b).absnorm() == 1


# -- ideals and primes ------------------------------------------------------

@dataclass(frozen=True)
class IdealRep:
    """A nonzero (principal) ideal via its unit-normalized generator."""

    gen: RingElem
    norm: int = field(compare=False)

    @classmethod
    def of(cls, a: RingElem) -> "IdealRep":
        g = unit_normalize(a)
        return cls(g, g.absnorm())

    def __mul__(self, other: "IdealRep") -> "IdealRep":
        return IdealRep.of(self.gen * other.gen)

    def contains(self, a: RingElem) -> bool:
        return self.gen.divides(a)

    def __repr__(self):
        return f"IdealRep({self.gen!r}, N={self.norm})"


def rational_primes(X: int) -> np.ndarray:
    """Primes <= X by sieve."""
    if X < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(X + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(X) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve).astype(np.int64)


def kronecker(disc: int, p: int) -> int:
    """Kronecker symbol (disc / p) for a prime p."""
    if p == 2:
        if disc % 2 == 0:
            return 0
        return 1 if disc % 8 in (1, 7) else -1
    r = disc % p
    if r == 0:
        return 0
    return 1 if pow(r, (p - 1) // 2, p) == 1 else -1


def splitting(F: FieldSpec, p: int) -> str:
    if F.degree == 1:
        return "rational"
    k = kronecker(F.disc, p)
    return {1: "split", 0: "ramified", -1: "inert"}[k]


def _root_of_minpoly(F: FieldSpec, p: int) -> int:
    """A root of X^2 - T X + M modulo p (p split or ramified)."""
    T, M = F.trace, F.mconst
    if p < 50:
        for r in range(p):
            if (r * r - T * r + M) % p == 0:
                return r
        raise ArithmeticError("no root")
    from sympy.ntheory import sqrt_mod

    s = sqrt_mod(F.disc % p, p)
    return ((T + s) * pow(2, -1, p)) % p


def primes_above(F: FieldSpec, p: int) -> list[IdealRep]:
    """The prime ideals of O_K above the rational prime p."""
    if F.degree == 1:
        return [IdealRep.of(F(p))]
    kind = splitting(F, p)
    if kind == "inert":
        return [IdealRep.of(F(p))]
    r = _root_of_minpoly(F, p)
    pi = ring_gcd(F(p), F(-r, 1))
    if pi.absnorm() != p:
        raise ArithmeticError(f"failed to split {p}")
    if kind == "ramified":
        return [IdealRep.of(pi)]
    other = unit_normalize(F(p) // pi)
    out = [IdealRep.of(pi), IdealRep.of(other)]
    return sorted(out, key=lambda I: I.gen.key())


def primes_up_to(F: FieldSpec, X: int) -> list[tuple[IdealRep, int]]:
    """All prime ideals of norm <= X, each once, ordered by norm."""
    out = []
    for p in rational_primes(X):
        p = int(p)
        for P in primes_above(F, p):
            if P.norm <= X:
                out.append((P, P.norm))
    out.sort(key=lambda t: (t[1], t[0].gen.key()))
    return out


def prime_ideal_norms(F: FieldSpec, X: int) -> np.ndarray:
    """Norms of all prime ideals with norm <= X (with multiplicity), sorted."""
    ps = rational_primes(X)
    if F.degree == 1:
        return ps
    norms = []
    for p in ps:
        p = int(p)
        k = kronecker(F.disc, p)
        if k == 1:
            norms += [p, p]
        elif k == 0:
            norms.append(p)
        elif p * p <= X:
            norms.append(p * p)
    return np.sort(np.asarray(norms, dtype=np.int64))


def _int_factor(n: int) -> dict[int, int]:
    n = abs(n)
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def factor(a: RingElem) -> list[tuple[IdealRep, int]]:
    """Prime ideal factorization of a*O_K (trial division; small inputs)."""
    if a.is_zero():
        raise ValueError("cannot factor zero")
    F = a.field
    out = []
    rest = a
    for p in sorted(_int_factor(a.absnorm())):
        for P in primes_above(F, p):
            e = 0
            while True:
                q = rest.exact_div(P.gen)
                if q is None:
                    break
                rest, e = q, e + 1
            if e:
                out.append((P, e))
    if not rest.is_unit():
        raise ArithmeticError(f"incomplete factorization of {a}")
    return out


def squarefree_divisors(a: RingElem) -> list[tuple[RingElem, int]]:
    """(d, mu(d)) for the squarefree divisors d of a, generators normalized."""
    F = a.field
    divs = [(F.one, 1)]
    for P, _ in factor(a):
        divs += [(unit_normalize(d * P.gen), -m) for d, m in divs]
    return divs


def elements_up_to(F: FieldSpec, X: int, normalized: bool = False) -> list[RingElem]:
    """Nonzero elements with |N| <= X, sorted by (|N|, x, y)."""
    out = []
    if F.degree == 1:
        for x in range(1, X + 1):
            out.append(F(x))
            if not normalized:
                out.append(F(-x))
    else:
        D = abs(F.disc)
        T = F.trace
        ymax = math.isqrt(4 * X // D) if X > 0 else 0
        for y in range(-ymax, ymax + 1):
            R2 = 4 * X - D * y * y
            if R2 < 0:
                continue
            R = math.isqrt(R2)
            lo = -((R + T * y) // 2)
            hi = (R - T * y) // 2
            for x in range(lo, hi + 1):
                if x == 0 and y == 0:
                    continue
                e = F(x, y)
                if e.absnorm() > X:
                    continue
                if normalized and unit_normalize(e) != e:
                    continue
                out.append(e)
    out.sort(key=lambda e: (e.absnorm(), e.x, e.y))
    return out
