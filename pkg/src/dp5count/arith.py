"""Coprimality densities and the polytope volume behind the leading term.

theta0 and theta encode the coprimality conditions between the four a_i and
the six a_ij; each closed formula here is checked against a direct
enumeration of the finite sum or count it summarizes.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .constants import FinitePart, euler_product
from .cubics import HeightSpec
from .nfield import (
    FieldSpec,
    IdealRep,
    RingElem,
    elements_up_to,
    factor,
    make_field,
    primes_up_to,
    ring_gcd,
    unit_normalize,
)
from .torsor import (
    CompletionError,
    complete_dependent,
    coprimality_check,
    height_torsor,
)

__all__ = [
    "ScaleError",
    "ThetaValue",
    "TruncatedTheta",
    "MobiusReport",
    "theta0",
    "theta_euler",
    "theta_bruteforce",
    "theta_direct",
    "theta_truncated_dp",
    "theta_truncation_bound",
    "mobius_identity_check",
    "torsor_box_points",
    "theta1",
    "random_coprime_aprime",
    "v1_volume",
    "v1_exact",
    "v1_monte_carlo",
    "polytope_volume",
]


class ScaleError(ValueError):
    """The requested enumeration exceeds the oracle scale."""


def _field_of(aprime: Sequence) -> FieldSpec:
    for a in aprime:
        if isinstance(a, RingElem):
            return a.field
        if isinstance(a, IdealRep):
            return a.gen.field
    return make_field("Q")


def _gens(aprime: Sequence, F: FieldSpec | None = None) -> list[RingElem]:
    F = F or _field_of(aprime)
    out = []
    for a in aprime:
        g = a.gen if isinstance(a, IdealRep) else F(a)
        if g.is_zero():
            raise ValueError("ideals must be nonzero")
        out.append(g)
    if len(out) != 4:
        raise ValueError("expected four ideals")
    return out


def _primes_of(a: RingElem) -> list[IdealRep]:
    return [P for P, _ in factor(a)] if a.absnorm() > 1 else []


# ---------------------------------------------------------------------------
# theta0 and the Euler product

def theta0(aprime: Sequence) -> int:
    """1 iff the four ideals are pairwise coprime."""
    a = _gens(aprime)
    for i in range(4):
        for j in range(i + 1, 4):
            if ring_gcd(a[i], a[j]).absnorm() != 1:
                return 0
    return 1


@dataclass(frozen=True)
class ThetaValue:
    """theta(a') with an interval for the infinite product."""

    value: mpmath.mpf
    lower: mpmath.mpf
    upper: mpmath.mpf
    p_max: int


def _theta_local_free(q: int) -> Fraction:
    x = Fraction(1, q)
    return 1 - 4 * x * x + 3 * x ** 3


def _theta_local_div(q: int) -> Fraction:
    x = Fraction(1, q)
    return (1 - x) * (1 - x * x)


def theta_euler(aprime: Sequence, p_max: int = 10**5, dps: int = 30) -> ThetaValue:
    """prod_{p | a1a2a3a4} (1 - 1/Np)(1 - 1/Np^2) * prod_{p not dividing} (1 - 4/Np^2 + 3/Np^3).

    Both kinds of factor lie in (0, 1).  The second product runs over Np <= p_max;
    for q >= 7 its factors satisfy -log f <= 5/q^2, and at most [K:Q] prime
    ideals share a norm, so the omitted tail lies in [exp(-5d/p_max), 1].
    """
    F = _field_of(aprime)
    a = _gens(aprime, F)
    if not theta0(a):
        raise ValueError("theta is only defined for pairwise coprime ideals")
    p_max = max(int(p_max), 6)
    divs = set()
    for g in a:
        divs.update(P.gen.key() for P in _primes_of(g))
    with mpmath.workdps(dps):
        val = mpmath.mpf(1)
        for P, q in primes_up_to(F, p_max):
            f = _theta_local_div(q) if P.gen.key() in divs else _theta_local_free(q)
            val *= mpmath.mpf(f.numerator) / f.denominator
        # divisors of a' beyond p_max contribute exact factors
        for g in a:
            for P in _primes_of(g):
                if P.norm > p_max:
                    f = _theta_local_div(P.norm)
                    val *= mpmath.mpf(f.numerator) / f.denominator
        lower = val * mpmath.exp(-5.0 * F.degree / p_max)
        return ThetaValue(+val, +lower, +val, p_max)


# ---------------------------------------------------------------------------
# the truncated sum theta(a', T1)

@dataclass(frozen=True)
class TruncatedTheta:
    """theta(a', T1) = D(a', T1) * prod_i E(a_i, T1)."""

    value: Fraction | float
    D: Fraction | float
    E: tuple
    T1: int
    method: str
    terms: int = 0
    seconds: float = 0.0


def _sqfree_ideals(F: FieldSpec, X: int, exclude: set = frozenset()) -> list[tuple[RingElem, int, tuple]]:
    """Squarefree ideals of norm <= X avoiding ``exclude``: (gen, mu, prime keys)."""
    primes = [(P, q) for P, q in primes_up_to(F, X) if P.gen.key() not in exclude]
    out = [(F.one, 1, ())]

    def rec(start, gen, norm, mu, keys):
        for t in range(start, len(primes)):
            P, q = primes[t]
            if norm * q > X:
                break
            g = gen * P.gen
            k = keys + (P.gen.key(),)
            out.append((g, -mu, k))
            rec(t + 1, g, norm * q, -mu, k)

    rec(0, F.one, 1, 1, ())
    return out


def _E_truncated(a: RingElem, T1: int) -> Fraction:
    total = Fraction(0)
    Ps = _primes_of(a)
    for r in range(len(Ps) + 1):
        for sub in itertools.combinations(Ps, r):
            n = math.prod(P.norm for P in sub)
            if n <= T1:
                total += Fraction((-1) ** r, n)
    return total


def theta_bruteforce(aprime: Sequence, T1: int, method: str = "auto",
                     max_terms: int = 2_000_000) -> TruncatedTheta:
    """The finite sum theta(a', T1), summed term by term.

    method "direct" enumerates every d-tuple in exact rationals; "dp" regroups
    the same terms prime by prime (floating point); "auto" uses direct
    enumeration when it has at most ``max_terms`` tuples.
    """
    if method not in ("auto", "direct", "dp"):
        raise ValueError(f"unknown method {method!r}")
    if method == "dp":
        return theta_truncated_dp(aprime, T1)
    try:
        return theta_direct(aprime, T1, max_terms)
    except ScaleError:
        if method == "direct":
            raise
        return theta_truncated_dp(aprime, T1)


def theta_direct(aprime: Sequence, T1: int, max_terms: int = 2_000_000) -> TruncatedTheta:
    """theta(a', T1) as an exact rational, by direct enumeration of the d- and e-tuples.

    d runs over 4-tuples of squarefree ideals with N d_i <= T1 and d_i coprime
    to a_j (j != i); e over squarefree e_i | a_i with N e_i <= T1.  Each term is
    mu(d, e) / N((d1 n d2 n (d3 + d4)) (d2 n d3 n d4) (d1 n d3 n d4) e1 e2 e3 e4).
    For squarefree ideals the intersection is the lcm (union of prime
    supports) and the sum is the gcd (intersection of supports).
    """
    t0 = time.perf_counter()
    F = _field_of(aprime)
    a = _gens(aprime, F)
    if not theta0(a):
        raise ValueError("theta is only defined for pairwise coprime ideals")
    T1 = int(T1)
    excl = [set(P.gen.key() for P in _primes_of(g)) for g in a]
    norm_of = {P.gen.key(): q for P, q in primes_up_to(F, max(T1, 2))}
    cand = []
    for i in range(4):
        banned = set().union(*(excl[j] for j in range(4) if j != i))
        cand.append([(mu, frozenset(k)) for _, mu, k in _sqfree_ideals(F, T1, banned)])
    n_terms = math.prod(len(c) for c in cand)
    if n_terms > max_terms:
        raise ScaleError(f"{n_terms} d-tuples exceed the direct-enumeration limit {max_terms}")

    def N(keys) -> int:
        return math.prod(norm_of[k] for k in keys)

    D = Fraction(0)
    for (m1, s1), (m2, s2), (m3, s3), (m4, s4) in itertools.product(*cand):
        den = N(s1 | s2 | (s3 & s4)) * N(s2 | s3 | s4) * N(s1 | s3 | s4)
        D += Fraction(m1 * m2 * m3 * m4, den)
    E = tuple(_E_truncated(g, T1) for g in a)
    return TruncatedTheta(D * math.prod(E), D, E, T1, "direct", n_terms,
                          time.perf_counter() - t0)


def _budget_classes(T1: int) -> tuple[np.ndarray, dict]:
    vals = sorted({T1 // m for m in range(1, T1 + 1)})
    return np.array(vals, dtype=np.int64), {v: i for i, v in enumerate(vals)}


def theta_truncated_dp(aprime: Sequence, T1: int) -> TruncatedTheta:
    """theta(a', T1) in floating point, the same finite sum regrouped by primes.

    A d-tuple is an assignment of a subset S_p of {1..4} to each prime p, with
    local weight 1, -Np^-2 or (-1)^|S| Np^-3 for |S| = 0, 1, >= 2; the
    truncation couples primes only through the four norms.  The state is the
    vector of remaining budgets floor(T1 / N d_i), which takes about 2 sqrt(T1)
    values per coordinate.  Primes dividing a_j may only enter d_j; they are
    applied at the end as one factor per coordinate.
    """
    t0 = time.perf_counter()
    F = _field_of(aprime)
    a = _gens(aprime, F)
    if not theta0(a):
        raise ValueError("theta is only defined for pairwise coprime ideals")
    T1 = int(T1)
    V, pos = _budget_classes(T1)
    L = len(V)
    excl = {}
    for j, g in enumerate(a):
        for P in _primes_of(g):
            excl[P.gen.key()] = j
    A = np.zeros((L,) * 4)
    A[(L - 1,) * 4] = 1.0
    subsets = [S for r in range(1, 5) for S in itertools.combinations(range(4), r)]
    for P, q in sorted(primes_up_to(F, T1), key=lambda t: -t[1]):
        if P.gen.key() in excl:
            continue
        j0 = int(np.searchsorted(V, q))
        tgt = np.array([pos[int(v) // q] for v in V[j0:]], dtype=np.int64)
        starts = np.flatnonzero(np.r_[True, tgt[1:] != tgt[:-1]])
        utgt = tgt[starts]
        new = A.copy()
        # red[S]: A summed into target classes along the axes of S (in axis order)
        red = {(): A}
        for S in subsets:
            parent = red[S[:-1]]
            ax = S[-1]
            sl = [slice(None)] * 4
            sl[ax] = slice(j0, None)
            red[S] = np.add.reduceat(parent[tuple(sl)], starts, axis=ax)
            w = -1.0 / q ** 2 if len(S) == 1 else (-1.0) ** len(S) / q ** 3
            # axes of S moved to the front so the scatter uses adjacent indices
            dst = np.moveaxis(new, S, range(len(S)))
            dst[np.ix_(*[utgt] * len(S))] += w * np.moveaxis(red[S], S, range(len(S)))
        A = new
    # primes dividing a_j: a factor sum_{e | rad a_j, N e <= b} mu(e) / N e^2 on coordinate j
    g = np.ones((4, L))
    for j in range(4):
        Ps = _primes_of(a[j])
        vec = np.zeros(L)
        for r in range(len(Ps) + 1):
            for sub in itertools.combinations(Ps, r):
                n = math.prod(P.norm for P in sub)
                vec += np.where(V >= n, (-1) ** r / n ** 2, 0.0)
        g[j] = vec
    D = float(np.einsum("abcd,a,b,c,d->", A, g[0], g[1], g[2], g[3]))
    E = tuple(_E_truncated(x, T1) for x in a)
    return TruncatedTheta(D * float(math.prod(E)), D, E, T1, "prime-dp", 0,
                          time.perf_counter() - t0)


def _sqfree_sum(F: FieldSpec, X: int, weight) -> float:
    """sum over squarefree ideals of norm <= X of prod_{p | d} weight(Np)."""
    primes = [q for _, q in primes_up_to(F, X)]
    total = 0.0

    def rec(start, norm, w):
        nonlocal total
        total += w
        for t in range(start, len(primes)):
            q = primes[t]
            if norm * q > X:
                break
            rec(t + 1, norm * q, w * weight(q))

    rec(0, 1, 1.0)
    return total


def _euler_upper(F: FieldSpec, weight, X: int, tail_coeff: float) -> float:
    """An upper bound for prod_p (1 + weight(Np)) given weight(q) <= tail_coeff / q^2 for q > X."""
    prod = 1.0
    for _, q in primes_up_to(F, X):
        prod *= 1.0 + weight(q)
    return prod * math.exp(tail_coeff * F.degree / X)


def theta_truncation_bound(aprime: Sequence, T1: int, X: int = 10**5) -> float:
    """A rigorous bound for |theta(a', T1) - theta(a')|.

    Terms with N d_i > T1 for a fixed i are bounded, with the other d_j free, by
    C0 h(d_i) / N(d_i)^2 where h(d) = prod_{p | d} (1 + 7/Np) and
    C0 = prod_p (1 + 3/Np^2 + 4/Np^3).  The sum of h(d)/N d^2 over N d > T1 is
    the full Euler product minus the enumerated part.  The E-factors contribute
    their omitted divisor sums.
    """
    F = _field_of(aprime)
    a = _gens(aprime, F)
    T1 = int(T1)
    X = max(X, T1, 7)
    hw = lambda q: (1.0 + 7.0 / q) / q ** 2  # noqa: E731
    full = _euler_upper(F, hw, X, 1.5)
    head = _sqfree_sum(F, T1, hw)
    C0 = _euler_upper(F, lambda q: 3.0 / q ** 2 + 4.0 / q ** 3, X, 3.6)
    d_tail = 4.0 * C0 * max(full - head, 0.0)
    Ebar, Etail = [], []
    for g in a:
        Ps = _primes_of(g)
        Ebar.append(math.prod(1.0 + 1.0 / P.norm for P in Ps))
        t = 0.0
        for r in range(len(Ps) + 1):
            for sub in itertools.combinations(Ps, r):
                n = math.prod(P.norm for P in sub)
                if n > T1:
                    t += 1.0 / n
        Etail.append(t)
    e_part = sum(Etail[i] * math.prod(Ebar[j] for j in range(4) if j != i) for i in range(4))
    return d_tail * math.prod(Ebar) + e_part


# ---------------------------------------------------------------------------
# the Moebius identity on a box

_MONO = None


def _monomial_coords():
    global _MONO
    if _MONO is None:
        from .cubics import MONOMIAL_COORDS

        _MONO = MONOMIAL_COORDS
    return _MONO


def torsor_box_points(aprime: Sequence, H: HeightSpec, B) -> list[tuple[RingElem, ...]]:
    """All (a12, a13, a14, a23, a24, a34) above a' with height <= B, ignoring coprimality.

    Pure-Python enumeration for small boxes: a12, a23, a34 are bounded through
    the monomials that contain them, and the congruences decide integrality.
    """
    F = H.field
    a1, a2, a3, a4 = _gens(aprime, F)
    L = H.monomial_bounds(B)
    mono = _monomial_coords()
    Na = [a1.absnorm(), a2.absnorm(), a3.absnorm(), a4.absnorm()]

    def bound(c: int, known: dict) -> int:
        best = None
        for m, coords in enumerate(mono):
            if c not in coords:
                continue
            den = 1
            for x in coords:
                if x < 4:
                    den *= Na[x]
                elif x != c and x in known:
                    den *= known[x]
            v = L[m] // den
            best = v if best is None else min(best, v)
        return best

    out = []
    m12 = bound(4, {})
    for a12 in elements_up_to(F, m12):
        n12 = a12.absnorm()
        m23 = bound(7, {4: n12})
        for a23 in elements_up_to(F, m23):
            if (a3 * a23 - a1 * a12).exact_div(a4) is None:
                continue
            n23 = a23.absnorm()
            m34 = bound(9, {4: n12, 7: n23})
            for a34 in elements_up_to(F, m34):
                try:
                    T = complete_dependent((a1, a2, a3, a4), a12, a23, a34)
                except CompletionError:
                    continue
                if height_torsor(T, H) <= B:
                    out.append(T)
    return out


@dataclass
class MobiusReport:
    ok: bool
    lhs: int
    rhs: int
    box_points: int
    d_e_terms: int
    seconds: float = 0.0
    aprime: tuple = field(default_factory=tuple)


def _sqfree_divisors_of(g: RingElem) -> list[tuple[frozenset, int, RingElem]]:
    Ps = _primes_of(g)
    out = []
    for r in range(len(Ps) + 1):
        for sub in itertools.combinations(Ps, r):
            gen = g.field.one
            for P in sub:
                gen = gen * P.gen
            out.append((frozenset(P.gen.key() for P in sub), (-1) ** r, gen))
    return out


def mobius_identity_check(field: FieldSpec | str, H: HeightSpec, aprime: Sequence, B) -> MobiusReport:
    """|A| = sum_{d, e} mu(d, e) |{a'' : torsor, box, f_ij | a_ij}| by enumeration of both sides.

    The left side counts box points satisfying every coprimality condition.
    The right side drops them and sums mu over d (d_i coprime to a_j for
    j != i) and e (e_i | a_i), with f_ij = (d_i n d_j) e_k e_l dividing a_ij;
    the d-sum is finite because d_i must divide the nonzero a_ij.
    """
    t0 = time.perf_counter()
    F = make_field(field) if isinstance(field, str) else field
    a = _gens(aprime, F)
    if not theta0(a):
        raise ValueError("the identity is stated for pairwise coprime a'")
    pts = torsor_box_points(a, H, B)
    lhs = sum(1 for T in pts if coprimality_check(T))
    e_cands = [_sqfree_divisors_of(g) for g in a]
    excl = [set(P.gen.key() for P in _primes_of(g)) for g in a]
    pair_idx = {(0, 1): 4, (0, 2): 5, (0, 3): 6, (1, 2): 7, (1, 3): 8, (2, 3): 9}
    rhs, terms = 0, 0
    for T in pts:
        c = T.coords
        d_cands = []
        for i in range(4):
            others = [c[pair_idx[tuple(sorted((i, j)))]] for j in range(4) if j != i]
            g = ring_gcd(ring_gcd(others[0], others[1]), others[2])
            banned = set().union(*(excl[j] for j in range(4) if j != i))
            d_cands.append([d for d in _sqfree_divisors_of(g) if not (d[0] & banned)])
        for dd in itertools.product(*d_cands):
            for ee in itertools.product(*e_cands):
                ok = True
                for (i, j), idx in pair_idx.items():
                    k, l = (t for t in range(4) if t not in (i, j))
                    gen = F.one
                    # d_i n d_j on squarefree supports is generated by the lcm
                    for key in dd[i][0] | dd[j][0]:
                        gen = gen * F(key)
                    gen = gen * ee[k][2] * ee[l][2]
                    if not gen.divides(c[idx]):
                        ok = False
                        break
                terms += 1
                if ok:
                    rhs += math.prod(d[1] for d in dd) * math.prod(e[1] for e in ee)
    return MobiusReport(lhs == rhs, lhs, rhs, len(pts), terms, time.perf_counter() - t0,
                        tuple(x.key() for x in a))


# ---------------------------------------------------------------------------
# theta_1 and V_1

def theta1(p_max: int, field: FieldSpec | str = "Q", dps: int = 30) -> FinitePart:
    """prod_p (1 - 1/Np)^5 (1 + 5/Np + 1/Np^2): the finite part of the constant."""
    return euler_product(field, p_max, dps=dps)


def _v1_constraints() -> tuple[list[list[Fraction]], list[Fraction]]:
    rows, rhs = [], []
    for l in range(4):
        rows.append([Fraction(-1) if t == l else Fraction(2) for t in range(4)])
        rhs.append(Fraction(1))
    for t in range(4):
        rows.append([Fraction(-1) if s == t else Fraction(0) for s in range(4)])
        rhs.append(Fraction(0))
    return rows, rhs


def _normalize_rows(A, b):
    """Scale each row so its first nonzero entry is +-1; drop duplicates and 0 <= c rows."""
    seen, outA, outb = set(), [], []
    for row, r in zip(A, b):
        piv = next((x for x in row if x != 0), None)
        if piv is None:
            if r < 0:
                return None  # infeasible
            continue
        s = abs(piv)
        key = (tuple(x / s for x in row), r / s)
        if key in seen:
            continue
        seen.add(key)
        outA.append(list(key[0]))
        outb.append(key[1])
    return outA, outb


def polytope_volume(A: list[list[Fraction]], b: list[Fraction]) -> Fraction:
    """Exact volume of {x : A x <= b} (bounded) by Lasserre's recursion.

    vol_d(P) = (1/d) sum_i b_i / |a_ij| vol_{d-1}(proj_j F_i), with F_i the
    facet a_i x = b_i projected along a coordinate j where a_ij != 0.
    Degenerate facets contribute zero.
    """
    norm = _normalize_rows(A, b)
    if norm is None:
        return Fraction(0)
    A, b = norm
    d = len(A[0]) if A else 0
    if d == 1:
        lo, hi = None, None
        for (c,), r in zip(A, b):
            v = r / c
            if c > 0:
                hi = v if hi is None else min(hi, v)
            else:
                lo = v if lo is None else max(lo, v)
        if lo is None or hi is None:
            raise ValueError("unbounded")
        return max(hi - lo, Fraction(0))
    total = Fraction(0)
    for i, (ai, bi) in enumerate(zip(A, b)):
        if bi == 0:
            continue
        j = next(t for t in range(d) if ai[t] != 0)
        # substitute x_j = (b_i - sum_{t != j} a_it x_t) / a_ij into the other rows
        subA, subb = [], []
        for k, (ak, bk) in enumerate(zip(A, b)):
            if k == i:
                continue
            f = ak[j] / ai[j]
            subA.append([ak[t] - f * ai[t] for t in range(d) if t != j])
            subb.append(bk - f * bi)
        total += bi / abs(ai[j]) * polytope_volume(subA, subb)
    return total / d


def v1_exact() -> Fraction:
    """V1 = vol{x >= 0 : 2x_i + 2x_j + 2x_k - x_l <= 1 for each l}."""
    return polytope_volume(*_v1_constraints())


def v1_monte_carlo(samples: int = 10**7, seed: int = 0) -> tuple[float, float]:
    """MC estimate and standard error on the box [0, 1/2]^4.

    The box contains the polytope: adding the constraints for two indices
    l != i gives 4 x_i <= 2 minus nonnegative terms.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    hits = 0
    done = 0
    box = 0.5 ** 4
    while done < samples:
        m = min(1_000_000, samples - done)
        x = rng.random((m, 4)) * 0.5
        s = x.sum(axis=1)
        # 2(s - x_l) - x_l <= 1  <=>  2s - 3x_l <= 1
        ok = np.all(2 * s[:, None] - 3 * x <= 1.0, axis=1)
        assert np.all(x[ok] <= 0.5)
        hits += int(ok.sum())
        done += m
    p = hits / samples
    return box * p, box * math.sqrt(p * (1 - p) / samples)


def v1_volume(method: str = "exact", samples: int = 10**7, seed: int = 0):
    if method == "exact":
        return v1_exact()
    if method in ("mc", "MC", "monte-carlo"):
        return v1_monte_carlo(samples, seed)[0]
    raise ValueError(f"unknown method {method!r}")


def random_coprime_aprime(F: FieldSpec | str, rng, max_norm: int = 6) -> tuple[RingElem, ...]:
    """Four pairwise coprime nonzero elements of norm <= max_norm, drawn with ``rng``."""
    F = make_field(F) if isinstance(F, str) else F
    pool = elements_up_to(F, max_norm)
    while True:
        a = tuple(pool[int(rng.integers(len(pool)))] for _ in range(4))
        if theta0(a):
            return a
