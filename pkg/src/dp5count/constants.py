"""The predicted leading constant c = alpha * rho^5 / |disc| * prod_v omega_v.

Finite places are exact rationals multiplied in high precision with a
rigorous tail interval.  The archimedean factor is computed two independent
ways: a Monte Carlo volume and a deterministic (or randomized quasi-Monte
Carlo) integral over three affine charts of the plane.
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

from .cubics import CUBIC_MONOMIALS, HeightSpec
from .nfield import FieldSpec, IdealRep, make_field, prime_ideal_norms

__all__ = [
    "ALPHA",
    "alpha",
    "euler_factor",
    "euler_factor_poly",
    "fp_point_count",
    "fp_point_count_lines",
    "FinitePart",
    "euler_product",
    "tail_log_bound",
    "ArchDensity",
    "arch_density_volume",
    "arch_density_integral",
    "ConstantBreakdown",
    "assemble_constant",
    "PrecisionError",
]

ALPHA = Fraction(1, 144)


class PrecisionError(RuntimeError):
    """The requested relative precision was not reached within the budget."""


def alpha() -> Fraction:
    return ALPHA


# ---------------------------------------------------------------------------
# finite places

def euler_factor(q: int) -> Fraction:
    """(1 - 1/q)^5 (1 + 5/q + 1/q^2) for a residue field of size q."""
    q = int(q)
    if q < 2:
        raise ValueError(f"residue field size must be >= 2, got {q}")
    x = Fraction(1, q)
    return (1 - x) ** 5 * (1 + 5 * x + x * x)


def euler_factor_poly() -> tuple[int, ...]:
    """Integer coefficients c_0..c_7 with euler_factor(q) = sum c_k q^-k."""
    # (1 - x)^5 (1 + 5x + x^2), multiplied out with integer arithmetic
    a = [math.comb(5, k) * (-1) ** k for k in range(6)]
    b = [1, 5, 1]
    out = [0] * 8
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return tuple(out)


def _residue_size(F: FieldSpec, P) -> int:
    if isinstance(P, IdealRep):
        return P.norm
    return int(P)


def _prime_power(q: int) -> tuple[int, int]:
    for p in range(2, q + 1):
        if q % p == 0:
            f, r = 0, q
            while r % p == 0:
                r //= p
                f += 1
            if r != 1:
                raise ValueError(f"{q} is not a prime power")
            return p, f
    raise ValueError(f"{q} is not a prime power")


def _residue_elements(q: int) -> np.ndarray:
    """F_q as the additive group F_p^f: row t holds the digits of t in base p."""
    p, f = _prime_power(q)
    out = np.zeros((q, f), dtype=np.int64)
    for t in range(q):
        r = t
        for k in range(f):
            out[t, k] = r % p
            r //= p
    return out


def fp_point_count(field: FieldSpec | str, P) -> int:
    """#X(F_q) by enumeration of P^2(F_q) with the four points blown up.

    Points of P^2 are listed by their canonical representatives (1:a:b),
    (0:1:b), (0:0:1); each of the four base points found among them is
    replaced by the q + 1 points of its exceptional line.
    """
    F = make_field(field) if isinstance(field, str) else field
    q = _residue_size(F, P)
    _prime_power(q)
    elems = range(q)
    zero, one = 0, 1  # element indices: 0 is zero, 1 is the unit digit vector
    base = {(one, zero, zero), (zero, one, zero), (zero, zero, one), (one, one, one)}
    reps = itertools.chain(
        ((one, a, b) for a in elems for b in elems),
        ((zero, one, b) for b in elems),
        ((zero, zero, one),),
    )
    line_points = q + 1  # P^1(F_q)
    total = 0
    for pt in reps:
        total += line_points if pt in base else 1
    return total


def fp_point_count_lines(q: int) -> int:
    """#X(F_q) = #U(F_q) + #(union of the ten lines), counted independently.

    U is the complement of the six lines through pairs of base points; the
    ten lines on X meet in 15 points (the Petersen graph), so their union has
    10(q + 1) - 15 points.
    """
    E = _residue_elements(q)
    p = _prime_power(q)[0]
    nz = np.any(E != 0, axis=1)
    one = np.zeros(E.shape[1], dtype=np.int64)
    one[0] = 1
    ne1 = np.any(E != one, axis=1)
    u = 0
    for a in range(q):
        if not (nz[a] and ne1[a]):
            continue
        diff = np.any((E - E[a]) % p != 0, axis=1)
        u += int(np.count_nonzero(nz & ne1 & diff))
    return u + 10 * (q + 1) - 15


def tail_log_bound(F: FieldSpec, X: int) -> float:
    """Upper bound for |log prod_{N p > X} euler_factor(N p)|, X >= 6.

    For x = 1/q <= 1/7 the factor lies in [0.8, 1) and -log f <= 15 x^2.  At most
    d = [K:Q] prime ideals share a norm, and sum_{n > X} n^-2 < 1/X.
    """
    if X < 6:
        raise ValueError("tail bound needs X >= 6")
    return 15.0 * F.degree / X


@dataclass(frozen=True)
class FinitePart:
    """prod over N p <= p_max of euler_factor, and an interval for the full product."""

    value: mpmath.mpf
    lower: mpmath.mpf
    upper: mpmath.mpf
    p_max: int
    n_factors: int
    tail_log: float

    def as_dict(self) -> dict:
        return {
            "value": float(self.value),
            "lower": float(self.lower),
            "upper": float(self.upper),
            "p_max": self.p_max,
            "n_factors": self.n_factors,
            "tail_log_bound": self.tail_log,
        }


def _mp_factor(q: int) -> mpmath.mpf:
    c = euler_factor(q)
    return mpmath.mpf(c.numerator) / c.denominator


def euler_product(field: FieldSpec | str, p_max: int, dps: int = 30) -> FinitePart:
    """The truncated Euler product with a rigorous interval for its limit.

    Every factor lies in (0, 1), so the limit is at most the truncated value; the
    lower end multiplies in the exact factors with p_max < N p <= 6 (if any)
    and exp(-tail_log_bound) for the rest.
    """
    F = make_field(field) if isinstance(field, str) else field
    p_max = int(p_max)
    if p_max < 2:
        raise ValueError("p_max must be >= 2")
    X = max(p_max, 6)
    norms = prime_ideal_norms(F, X)
    with mpmath.workdps(dps):
        val = mpmath.mpf(1)
        low_extra = mpmath.mpf(1)
        n = 0
        for q in norms:
            q = int(q)
            if q <= p_max:
                val *= _mp_factor(q)
                n += 1
            else:
                low_extra *= _mp_factor(q)
        tl = tail_log_bound(F, X)
        lower = val * low_extra * mpmath.exp(-tl)
        return FinitePart(+val, +lower, +val, p_max, n, tl)


# ---------------------------------------------------------------------------
# archimedean place

@dataclass(frozen=True)
class ArchDensity:
    """omega_v with its uncertainty; ``error`` is one standard error for
    stochastic methods and the quadrature error estimate otherwise."""

    value: float
    error: float
    method: str
    place: str
    seed: int | None = None
    samples: int = 0
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def rel_error(self) -> float:
        return self.error / abs(self.value)

    def interval(self, k: float = 3.0) -> tuple[float, float]:
        return self.value - k * self.error, self.value + k * self.error

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "error": self.error,
            "method": self.method,
            "place": self.place,
            "seed": self.seed,
            "samples": self.samples,
            "seconds": round(self.seconds, 3),
            "details": self.details,
        }


def _coeff_matrix(H: HeightSpec) -> tuple[np.ndarray, str]:
    """Member coefficients under the archimedean embedding, rows = members."""
    F = H.field
    place = F.places[0]
    if place.kind == "real":
        for f in H.forms:
            if not f.is_rational():
                raise ValueError("irrational coefficient at a real place")
        return np.array([[x for x, _ in f.coeffs] for f in H.forms], dtype=np.float64), "real"
    w = place.omega_image
    return (
        np.array([[x + y * w for x, y in f.coeffs] for f in H.forms], dtype=np.complex128),
        "complex",
    )


def _monomials(y: np.ndarray) -> np.ndarray:
    """(n, 3) points -> (n, 10) cubic monomials in CUBIC_MONOMIALS order."""
    y1, y2, y3 = y[:, 0], y[:, 1], y[:, 2]
    p = [[np.ones_like(y1), y1, y1 * y1, y1 * y1 * y1]]
    p.append([np.ones_like(y2), y2, y2 * y2, y2 * y2 * y2])
    p.append([np.ones_like(y3), y3, y3 * y3, y3 * y3 * y3])
    return np.stack([p[0][a] * p[1][b] * p[2][c] for a, b, c in CUBIC_MONOMIALS], axis=1)


def max_abs_v(C: np.ndarray, y: np.ndarray) -> np.ndarray:
    """max_P |P(y)|_v for (n, 3) points; |.|_v is the square modulus at a complex place."""
    vals = _monomials(y) @ C.T
    if np.iscomplexobj(vals):
        return np.max(vals.real ** 2 + vals.imag ** 2, axis=1)
    return np.max(np.abs(vals), axis=1)


def _volume_scale(kind: str) -> float:
    return 1.5 if kind == "real" else 12.0 / math.pi


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


_BASE_POINTS = ((1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1))


def _gradients(C: np.ndarray, p: Sequence[int]) -> np.ndarray:
    """(members, 3) gradients of the members at the point p."""
    g = np.zeros((C.shape[0], 3), dtype=C.dtype)
    for j, e in enumerate(CUBIC_MONOMIALS):
        for v in range(3):
            if e[v] == 0:
                continue
            ee = list(e)
            ee[v] -= 1
            g[:, v] += C[:, j] * e[v] * math.prod(p[w] ** ee[w] for w in range(3))
    return g


def _split(z: np.ndarray, i: int) -> tuple[np.ndarray, np.ndarray]:
    """z = t p_i + (transverse part), a unimodular change of coordinates."""
    if i < 3:
        return z[:, i], z[:, [j for j in range(3) if j != i]]
    return z[:, 0], z[:, 1:] - z[:, [0]]


def _join(t: np.ndarray, d: np.ndarray, i: int) -> np.ndarray:
    z = np.zeros((len(t), 3), dtype=d.dtype)
    if i < 3:
        z[:, i] = t
        z[:, [j for j in range(3) if j != i]] = d
    else:
        z[:, :] = t[:, None]
        z[:, 1:] += d
    return z


def _to_points(x: np.ndarray, cplx: bool) -> np.ndarray:
    return x[:, 0::2] + 1j * x[:, 1::2] if cplx else x


def _tube_radius(C: np.ndarray, i: int, cplx: bool, rng: np.random.Generator) -> float:
    """1 / min_{|d| = 1} max_P |grad P(p_i) . d| over sampled transverse directions.

    Near t p_i the members are t^2 times these linear forms, so the region at
    scale 2^k lies within |d| <~ radius * 8^-k / |t|^2.
    """
    g = _gradients(C, _BASE_POINTS[i])
    D = 4 if cplx else 2
    d = rng.normal(size=(200_000, D))
    d /= np.linalg.norm(d, axis=1)[:, None]
    d = _to_points(d, cplx)
    e = _join(np.zeros(len(d), dtype=d.dtype), d, i)
    return 1.0 / float(np.abs(e @ g.T).max(axis=1).min())


def _shell_stratified(C, cplx, k, samples, rng, fold):
    """Two-phase Neyman-allocated stratified sampling over the unit cubes of S."""
    n = 6 if cplx else 3
    cubes = [c for c in itertools.product((-2, -1, 0, 1), repeat=n)
             if not all(v in (-1, 0) for v in c)]
    weight = 1.0
    if fold:
        cubes = [c for c in cubes if c < tuple(-v - 1 for v in c)]
        weight = 2.0
    corner = np.array(cubes, dtype=np.float64)
    nc = len(cubes)

    def hits_for(counts):
        out = np.zeros(nc)
        owner = np.repeat(np.arange(nc), counts)
        for s in range(0, len(owner), 1_000_000):
            o = owner[s:s + 1_000_000]
            z = (corner[o] + rng.random((len(o), n))) * 2.0 ** k
            ok = max_abs_v(C, _to_points(z, cplx)) <= 1.0
            out += np.bincount(o, weights=ok, minlength=nc)
        return out

    m1 = max(4, samples // (10 * nc))
    pilot = hits_for(np.full(nc, m1))
    pt = (pilot + 0.5) / (m1 + 1)
    sd = np.sqrt(pt * (1 - pt))
    m2 = np.maximum(4, np.round((samples - m1 * nc) * sd / sd.sum())).astype(np.int64)
    p = hits_for(m2) / m2
    scale = 2.0 ** (n * k) * weight
    contrib = scale * float(p.sum())
    var = scale ** 2 * float(np.sum(p * (1 - p) / (m2 - 1)))
    return contrib, math.sqrt(var), int(m1 * nc + m2.sum())


def _shell_importance(C, cplx, k, samples, rng, radii, w0=0.2, batch=1_000_000):
    """Mixture importance sampling: uniform on S plus four tubes around the lines.

    Tube i is {a <= |t| <= b, |d| <= R_i 8^-k / |t|^2} in the coordinates
    z = t p_i + d; it has explicit volume and is sampled uniformly.  The
    uniform component keeps the estimator unbiased on the whole shell.
    Samples are drawn in batches so memory stays bounded.
    """
    s1 = s2 = 0.0
    for start in range(0, samples, batch):
        f = _importance_batch(C, cplx, k, min(batch, samples - start), rng, radii, w0)
        s1 += float(f.sum())
        s2 += float(np.dot(f, f))
    mean = s1 / samples
    sd = math.sqrt(max(s2 - samples * mean * mean, 0.0) / (samples - 1))
    scale = 2.0 ** ((6 if cplx else 3) * k)
    return scale * mean, scale * sd / math.sqrt(samples), samples


def _importance_batch(C, cplx, k, samples, rng, radii, w0):
    n = 6 if cplx else 3
    D = n - (2 if cplx else 1)
    sk = 8.0 ** (-k)
    a, b = 0.5, (2 * math.sqrt(2) if cplx else 2.0) + 0.5
    volS = 4.0 ** n - 2.0 ** n
    R = np.asarray(radii) * sk
    if cplx:
        volT = math.pi ** 2 / 2 * R ** 4 * 2 * math.pi * (a ** -6 - b ** -6) / 6
    else:
        volT = math.pi * R ** 2 * 2 * (a ** -3 - b ** -3) / 3
    wt = (1 - w0) / 4
    comp = rng.choice(5, size=samples, p=[w0] + [wt] * 4)
    z = np.zeros((samples, 3), dtype=np.complex128 if cplx else np.float64)
    idx = np.flatnonzero(comp == 0)
    got, need = [], len(idx)
    while need > 0:
        x = rng.uniform(-2, 2, size=(2 * need + 16, n))
        x = x[np.abs(x).max(axis=1) > 1][:need]
        got.append(x)
        need -= len(x)
    if got:
        z[idx] = _to_points(np.concatenate(got), cplx)
    for i in range(4):
        idx = np.flatnonzero(comp == i + 1)
        u = rng.random(len(idx))
        if cplx:
            r = (a ** -6 - u * (a ** -6 - b ** -6)) ** (-1 / 6)
            t = r * np.exp(2j * math.pi * rng.random(len(idx)))
        else:
            r = (a ** -3 - u * (a ** -3 - b ** -3)) ** (-1 / 3)
            t = r * rng.choice((-1.0, 1.0), size=len(idx))
        rho = R[i] / np.abs(t) ** 2
        d = rng.normal(size=(len(idx), D))
        d *= (rho * rng.random(len(idx)) ** (1 / D) / np.linalg.norm(d, axis=1))[:, None]
        z[idx] = _join(t, _to_points(d, cplx), i)
    zr = np.concatenate([z.real, z.imag], axis=1) if cplx else z
    sup = np.abs(zr).max(axis=1)
    inS = (sup > 1) & (sup <= 2)
    dens = w0 * inS / volS
    for i in range(4):
        t, d = _split(z, i)
        at = np.abs(t)
        dn = np.sqrt(np.sum(np.abs(d) ** 2, axis=1))
        inT = (at >= a) & (at <= b) & (dn * at ** 2 <= R[i])
        dens = dens + wt * inT / volT[i]
    hit = inS & (max_abs_v(C, z * 2.0 ** k) <= 1.0)
    return np.where(hit, 1.0 / np.where(hit, dens, 1.0), 0.0)


def arch_density_volume(
    H: HeightSpec,
    samples: int = 4_000_000,
    seed: int = 0,
    fold: bool = True,
    rtol_stop: float = 1e-6,
    max_shells: int = 16,
) -> ArchDensity:
    """Monte Carlo volume of {y : max_P |P(y)|_v <= 1}, scaled to omega_v.

    The region is unbounded (it contains neighbourhoods of the four lines
    through the base points), so it is cut into dyadic sup-norm shells
    2^k S with S = [-2, 2]^n minus [-1, 1]^n, n = 3 (real) or 6 (complex).
    Shells close enough to the origin lie inside the region and are counted
    exactly.  The next two shells are sampled by stratification over the
    unit cubes of S (Neyman allocation from a pilot, folded by y -> -y).
    Outer shells, where the region is a thin neighbourhood of the lines, use
    importance sampling from tubes around the lines.  Shell volumes decay by
    2^-n per step; sampling stops once the geometric tail is below
    ``rtol_stop`` of the total, and that tail is charged fully to the error.
    """
    t0 = time.perf_counter()
    C, kind = _coeff_matrix(H)
    cplx = kind == "complex"
    n = 6 if cplx else 3
    ratio = 2.0 ** (-n)
    # max_P |P| <= sum|c| * R^3 on the sup-norm ball of radius R
    cmax = float(np.max(np.sum(np.abs(C), axis=1)))
    k0 = math.floor(-math.log2(cmax) / 3.0) - 1
    while cmax * 2.0 ** (3 * (k0 + 1)) > 1.0:
        k0 -= 1
    inner = 2.0 ** (n * (k0 + 2))
    radii = [1.5 * _tube_radius(C, i, cplx, _rng(seed, 4000 + i)) for i in range(4)]
    shells = []
    total, var, used = inner, 0.0, 0
    k = k0 + 1
    while len(shells) < max_shells:
        rng = _rng(seed, 1000 + k)
        if k <= k0 + 2:
            contrib, se, m = _shell_stratified(C, cplx, k, samples, rng, fold)
            how = "stratified"
        else:
            contrib, se, m = _shell_importance(C, cplx, k, samples, rng, radii)
            how = "importance"
        shells.append({"k": k, "volume": contrib, "se": se, "sampler": how})
        total += contrib
        var += se * se
        used += m
        k += 1
        if contrib * ratio / (1 - ratio) < rtol_stop * total:
            break
    tail = shells[-1]["volume"] * ratio / (1 - ratio)
    total += tail
    err = math.sqrt(var) + tail
    sc = _volume_scale(kind)
    return ArchDensity(
        value=sc * total,
        error=sc * err,
        method="volume-mc",
        place=kind,
        seed=seed,
        samples=used,
        seconds=time.perf_counter() - t0,
        details={
            "inner_radius": 2.0 ** (k0 + 1),
            "inner_volume": inner,
            "tube_radii": radii,
            "shells": shells,
            "tail": tail,
            "fold": fold,
        },
    )


def _chart_points(chart: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    one = np.ones_like(a)
    cols = [a, b]
    cols.insert(chart, one)
    return np.stack(cols, axis=1)


def _integral_real(C: np.ndarray, rtol: float) -> tuple[float, float, dict]:
    from scipy.integrate import cubature

    def f(x, chart):
        return 1.0 / max_abs_v(C, _chart_points(chart, x[:, 0], x[:, 1]))

    total, err, parts = 0.0, 0.0, []
    for chart in range(3):
        for sa, sb in itertools.product((1, -1), repeat=2):
            lo = [min(0, sa), min(0, sb)]
            hi = [max(0, sa), max(0, sb)]
            res = cubature(f, lo, hi, args=(chart,), rtol=rtol, atol=rtol * 1e-3,
                           max_subdivisions=200_000)
            total += float(res.estimate)
            err += float(res.error)
            parts.append({"chart": chart, "quadrant": (sa, sb), "value": float(res.estimate),
                          "error": float(res.error), "status": res.status})
    return total, err, {"pieces": parts}


def _integral_complex(C: np.ndarray, m_log2: int, reps: int, seed: int) -> tuple[float, float, dict]:
    from scipy.stats import qmc

    m = 2 ** m_log2
    # 12 pieces: chart x sign of the two arguments; on each piece
    # r = 1 - z0^2, s = 1 - z1^2, arg u = +-pi z2^2, arg v = +-pi z3^2,
    # which turns the 1/dist^2 singularity at (1, 1) into a bounded integrand.
    pieces = [(c, sa, sb) for c in range(3) for sa in (1, -1) for sb in (1, -1)]
    estimates = np.zeros(reps)
    for r in range(reps):
        eng = qmc.Sobol(d=4, scramble=True, rng=_rng(seed, 7, r))
        z = eng.random(m)
        z0, z1, z2, z3 = z.T
        rr = 1 - z0 * z0
        ss = 1 - z1 * z1
        jac = (2 * z0) * (2 * z1) * (2 * math.pi * z2) * (2 * math.pi * z3) * rr * ss
        acc = 0.0
        for chart, sa, sb in pieces:
            u = rr * np.exp(1j * sa * math.pi * z2 * z2)
            v = ss * np.exp(1j * sb * math.pi * z3 * z3)
            y = _chart_points(chart, u, v)
            acc += float(np.mean(jac / max_abs_v(C, y)))
        estimates[r] = acc
    # the measure on each complex coordinate is twice Lebesgue
    estimates *= 4.0
    return (float(estimates.mean()), float(estimates.std(ddof=1) / math.sqrt(reps)),
            {"replicates": reps, "points_per_replicate": m * len(pieces)})


def arch_density_integral(
    H: HeightSpec,
    rtol: float = 1e-7,
    m_log2: int = 16,
    reps: int = 16,
    seed: int = 0,
) -> ArchDensity:
    """omega_v = integral over the plane of dx2 dx3 / max_P |P(1, x2, x3)|_v.

    The plane is covered exactly by the three charts {|y_j| <= 1 : y_c = 1};
    the form dx2 dx3 / max|P| is chart independent, so no far-field truncation
    occurs.  Real place: adaptive Gauss-Kronrod cubature on the twelve
    quadrants, whose corners carry the integrable singularities at the base
    points.  Complex place: polar coordinates on each polydisc chart and
    scrambled Sobol replicates; ``error`` is their standard error.
    """
    t0 = time.perf_counter()
    C, kind = _coeff_matrix(H)
    if kind == "real":
        val, err, det = _integral_real(C, rtol)
        method, seed_out, n = "cubature-gk21", None, 0
    else:
        val, err, det = _integral_complex(C, m_log2, reps, seed)
        method, seed_out, n = "rqmc-sobol", seed, reps * 12 * 2 ** m_log2
    return ArchDensity(
        value=val, error=err, method=method, place=kind, seed=seed_out, samples=n,
        seconds=time.perf_counter() - t0, details=det,
    )


# ---------------------------------------------------------------------------
# assembly

@dataclass(frozen=True)
class ConstantBreakdown:
    field: str
    heights_hash: str
    alpha: Fraction
    rho5: float
    inv_disc: Fraction
    beta: int
    finite: FinitePart
    arch: ArchDensity
    value: float
    lower: float
    upper: float

    def as_dict(self) -> dict:
        return {
            "field": self.field,
            "heights_hash": self.heights_hash,
            "alpha": f"{self.alpha.numerator}/{self.alpha.denominator}",
            "rho_K^5": self.rho5,
            "1/|disc|": f"{self.inv_disc.numerator}/{self.inv_disc.denominator}",
            "beta": self.beta,
            "finite_part": self.finite.as_dict(),
            "archimedean": self.arch.as_dict(),
            "c": self.value,
            "c_interval": [self.lower, self.upper],
        }


def assemble_constant(
    field: FieldSpec | str,
    H: HeightSpec,
    p_max: int = 10**6,
    method: str = "integral",
    rtol: float | None = None,
    seed: int = 0,
    arch: ArchDensity | None = None,
    **arch_kw,
) -> ConstantBreakdown:
    """c = alpha rho^5 / |disc| * finite part * omega_v with an interval.

    The archimedean interval is +-3 standard errors for stochastic methods and
    +-3 times the quadrature estimate otherwise; the output interval is the
    product of the input intervals.
    """
    F = make_field(field) if isinstance(field, str) else field
    if H.field.label != F.label:
        raise ValueError("height spec belongs to a different field")
    fin = euler_product(F, p_max)
    if arch is None:
        if method == "integral":
            arch = arch_density_integral(H, seed=seed, **arch_kw)
        elif method == "volume":
            arch = arch_density_volume(H, seed=seed, **arch_kw)
        else:
            raise ValueError(f"unknown method {method!r}")
    rho5 = F.rho ** 5
    inv_disc = Fraction(1, abs(F.disc))
    pre = float(ALPHA) * rho5 * float(inv_disc)
    a_lo, a_hi = arch.interval(3.0)
    value = pre * float(fin.value) * arch.value
    lower = pre * float(fin.lower) * max(a_lo, 0.0)
    upper = pre * float(fin.upper) * a_hi
    if rtol is not None and (upper - lower) / (2 * value) > rtol:
        raise PrecisionError(
            f"relative half-width {(upper - lower) / (2 * value):.2e} exceeds {rtol:.1e}"
        )
    return ConstantBreakdown(
        field=F.label, heights_hash=H.spec_hash, alpha=ALPHA, rho5=rho5, inv_disc=inv_disc,
        beta=1, finite=fin, arch=arch, value=value, lower=lower, upper=upper,
    )
