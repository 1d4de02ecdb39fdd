"""Exact counting engines.

Three independent ways to compute N(B) = #{x in U(K) : H(x) <= B}:

* ``count_direct`` walks primitive triples in the plane and computes the
  height from the value-gcd identity (an oracle for small B);
* ``count_torsor_naive`` enumerates every coprime torsor solution, whole
  unit orbits included;
* ``count_torsor_reduced`` splits the solutions into five symmetry classes
  and enumerates each through its Weyl-transformed problem, so the a'
  variables obey the strong bounds that come with n0 <= n_i.

Heights are integers here (one archimedean place and class number one), so
a rational B is replaced by floor(B) without changing any count.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import kernels
from .cubics import (
    COORDS,
    MONOMIAL_COORDS,
    PATHS,
    HeightSpec,
    weyl_height_spec,
    weyl_signed_permutation,
)
from .nfield import FieldSpec, make_field, unit_normalize
from .torsor import COPRIME_PAIRS, TorsorPoint, apply_s, normalize_plane_point

__all__ = [
    "CountResult",
    "BoxBounds",
    "BudgetExceeded",
    "count_direct",
    "count_torsor_naive",
    "count_torsor_reduced",
    "box_bounds",
    "w_tail_fraction",
    "default_workers",
]


class BudgetExceeded(RuntimeError):
    """The requested count is beyond the engine's intended scale."""


@dataclass
class CountResult:
    field: str
    spec_hash: str
    B: int
    N: int
    engine: str
    raw: int
    classes: tuple[int, ...] | None = None
    seconds: float = 0.0
    points: list | None = field(default=None, repr=False)
    extra: dict = field(default_factory=dict, repr=False)

    def csv_row(self) -> list:
        cls = list(self.classes) if self.classes is not None else [""] * 5
        return [self.field, self.spec_hash, self.B, self.N, self.raw, *cls, self.engine,
                f"{self.seconds:.3f}"]


CSV_HEADER = ["field", "heights_hash", "B", "N", "raw", "class0", "class1", "class2", "class3",
              "class4", "engine", "seconds"]


def default_workers() -> int:
    env = os.environ.get("DP5_WORKERS")
    if env:
        return max(1, int(env))
    return 1


def _bint(B) -> int:
    b = Fraction(B) if not isinstance(B, float) else Fraction(B).limit_denominator(10**9)
    if b < 0:
        raise ValueError("B must be nonnegative")
    return math.floor(b)


# ---------------------------------------------------------------------------
# static tables


@lru_cache(maxsize=None)
def _tables():
    mon_coords = np.array(MONOMIAL_COORDS, dtype=np.int64)
    edge_mons = np.full((10, 12), -1, dtype=np.int64)
    edge_nmons = np.zeros(10, dtype=np.int64)
    for m, cs in enumerate(MONOMIAL_COORDS):
        for c in cs:
            edge_mons[c, edge_nmons[c]] = m
            edge_nmons[c] += 1
    cop = np.array([p for p in COPRIME_PAIRS if not (p[0] < 4 and p[1] < 4)], dtype=np.int64)
    return mon_coords, edge_mons, edge_nmons, cop


def _lift_arrays(H: HeightSpec) -> tuple[np.ndarray, np.ndarray]:
    cx = np.array([[c[0] for c in t.coeffs] for t in H.lifts], dtype=np.int64)
    cy = np.array([[c[1] for c in t.coeffs] for t in H.lifts], dtype=np.int64)
    return cx, cy


def _middle_bounds(L: Sequence[int]) -> np.ndarray:
    """pb[j, k] = min of L over the two monomials with middle vertices {j, k}."""
    pb = np.full((4, 4), np.iinfo(np.int64).max, dtype=np.int64)
    for m, p in enumerate(PATHS):
        j, k = p[1] - 1, p[2] - 1
        pb[j, k] = min(pb[j, k], L[m])
        pb[k, j] = pb[j, k]
    return pb


def _iroot(n: int, k: int) -> int:
    """floor(n ** (1/k)) exactly."""
    if n <= 0:
        return 0
    r = int(round(n ** (1.0 / k)))
    while r**k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def _aprime_bounds(L: Sequence[int], reduced: bool):
    pb = _middle_bounds(L)
    trip = np.full(4, -1, dtype=np.int64)
    n0max = -1
    if reduced:
        for l in range(4):
            i, j, k = (t for t in range(4) if t != l)
            trip[l] = _iroot(int(pb[i, j]) * int(pb[i, k]) * int(pb[j, k]), 3)
        prod = 1
        for v in L:
            prod *= int(v)
        n0max = _iroot(prod, 15)
    return pb, trip, n0max


@lru_cache(maxsize=64)
def _element_arrays(label: str, X: int, normalized: bool):
    """Nonzero elements with |N| <= X sorted by norm, as int64 arrays."""
    F = make_field(label)
    if F.degree == 1:
        if normalized:
            xs = np.arange(1, X + 1, dtype=np.int64)
        else:
            xs = np.empty(2 * X, dtype=np.int64)
            xs[0::2] = np.arange(1, X + 1)
            xs[1::2] = -np.arange(1, X + 1)
        return xs, np.zeros_like(xs), np.abs(xs)
    D = abs(F.disc)
    T, M = F.trace, F.mconst
    ymax = math.isqrt(4 * X // D) if X > 0 else 0
    ys = np.arange(-ymax, ymax + 1, dtype=np.int64)
    xs_all, ys_all = [], []
    for y in ys:
        R2 = 4 * X - D * int(y) * int(y)
        if R2 < 0:
            continue
        R = math.isqrt(R2)
        lo = -((R + T * int(y)) // 2)
        hi = (R - T * int(y)) // 2
        xr = np.arange(lo, hi + 1, dtype=np.int64)
        xs_all.append(xr)
        ys_all.append(np.full(xr.shape, y, dtype=np.int64))
    ex = np.concatenate(xs_all)
    ey = np.concatenate(ys_all)
    en = ex * ex + T * ex * ey + M * ey * ey
    keep = (en > 0) & (en <= X)
    ex, ey, en = ex[keep], ey[keep], en[keep]
    if normalized:
        mask = np.ones(ex.shape, dtype=bool)
        # keep the lexicographically largest associate
        for ux, uy in F.units[1:]:
            vx = ex * ux - M * ey * uy
            vy = ex * uy + ey * ux + T * ey * uy
            bigger = (vx > ex) | ((vx == ex) & (vy > ey))
            mask &= ~bigger
        ex, ey, en = ex[mask], ey[mask], en[mask]
    order = np.lexsort((ey, ex, en))
    return ex[order], ey[order], en[order]


# ---------------------------------------------------------------------------
# bounds


@dataclass(frozen=True)
class BoxBounds:
    M12: int
    M23: int
    M34: int
    C_P: Fraction


def box_bounds(aprime: Sequence, B, H: HeightSpec) -> BoxBounds:
    """Bounds on |N(a12)|, |N(a23)|, |N(a34)| valid for every solution above a'.

    Each bound is the minimum over the monomials containing the coordinate of
    floor(C_m B) divided by the norms of the a_i in that monomial (the other
    edge factors have norm at least one).
    """
    F = H.field
    a = [F(v) for v in aprime]
    Nc = np.zeros(10, dtype=np.int64)
    known = np.zeros(10, dtype=bool)
    for i in range(4):
        Nc[i] = a[i].absnorm()
        known[i] = True
    L = np.array(H.monomial_bounds(_bint(B)), dtype=np.int64)
    mon_coords, edge_mons, edge_nmons, _ = _tables()
    out = [int(kernels.edge_bound(c, Nc, known, L, edge_mons, edge_nmons, mon_coords))
           for c in (4, 7, 9)]
    return BoxBounds(*out, C_P=H.c_p())


# ---------------------------------------------------------------------------
# torsor engines


def _run_shard(args):
    return kernels.torsor_count(*args)


def _torsor_pass(H: HeightSpec, Bint: int, mclass: int, reduced: bool, shards: int,
                 workers: int, collect: int, wgrid: np.ndarray, perm_back: np.ndarray):
    F = H.field
    deg, T, M = F.kernel_params()
    L = np.array(H.monomial_bounds(Bint), dtype=np.int64)
    pb, trip, n0max = _aprime_bounds([int(v) for v in L], reduced)
    amax = int(max(min(int(pb[i, j]) for j in range(4) if j != i) for i in range(4)))
    if reduced:
        amax = min(amax, n0max)
    a_x, a_y, a_n = _element_arrays(F.label, max(amax, 1), reduced)
    if deg == 2:
        e_x, e_y, e_n = _element_arrays(F.label, max(int(L.max()), 1), False)
    else:
        e_x = e_y = e_n = np.zeros(0, dtype=np.int64)
    mon_coords, edge_mons, edge_nmons, cop = _tables()
    lcx, lcy = _lift_arrays(H)
    whist_total = np.zeros(wgrid.shape[0], dtype=np.int64)
    cap = collect if collect else 0
    stats = np.zeros(8, dtype=np.int64)

    def args_for(shard, out, nout, whist):
        return (deg, T, M, a_x, a_y, a_n, e_x, e_y, e_n, L, mon_coords, edge_mons, edge_nmons,
                lcx, lcy, Bint, pb, trip, n0max, mclass, cop, shard, shards, float(Bint),
                wgrid, whist, perm_back, out, nout, stats)

    total = 0
    points = []
    if workers > 1 and shards > 1 and not collect:
        jobs = []
        for s in range(shards):
            whist = np.zeros(wgrid.shape[0], dtype=np.int64)
            jobs.append((args_for(s, np.zeros((0, 10, 2), dtype=np.int64),
                                  np.zeros(1, dtype=np.int64), whist), whist))
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run_shard_with_hist, [j[0] for j in jobs]))
        for cnt, wh, st in results:
            total += int(cnt)
            whist_total += wh
            stats += st
        return total, points, whist_total, stats
    for s in range(shards):
        before = stats.copy()
        out = np.zeros((cap, 10, 2), dtype=np.int64)
        nout = np.zeros(1, dtype=np.int64)
        whist = np.zeros(wgrid.shape[0], dtype=np.int64)
        cnt = int(kernels.torsor_count(*args_for(s, out, nout, whist)))
        if collect and nout[0] > cap:
            out = np.zeros((int(nout[0]), 10, 2), dtype=np.int64)
            nout[0] = 0
            whist[:] = 0
            stats[:] = before
            cnt = int(kernels.torsor_count(*args_for(s, out, nout, whist)))
        total += cnt
        whist_total += whist
        if collect:
            points.append(out[: int(nout[0])].copy())
    return total, points, whist_total, stats


def _run_shard_with_hist(args):
    cnt = kernels.torsor_count(*args)
    return int(cnt), args[25], args[-1]


def _to_points(F: FieldSpec, arrays: list, s: int) -> list[TorsorPoint]:
    out = []
    for arr in arrays:
        for row in arr:
            T = TorsorPoint(tuple(F(int(x), int(y)) for x, y in row))
            out.append(apply_s(T, s) if s else T)
    return out


def count_torsor_naive(field: FieldSpec | str, H: HeightSpec, B, shards: int = 1,
                       workers: int | None = None, collect: bool = False,
                       max_aprime_norm: int = 10**7) -> CountResult:
    """All coprime solutions over full unit orbits; N = raw / |mu|^5."""
    F = make_field(field) if isinstance(field, str) else field
    _check_field(F, H)
    Bint = _bint(B)
    t0 = time.perf_counter()
    workers = default_workers() if workers is None else workers
    L = H.monomial_bounds(Bint)
    pb = _middle_bounds(L)
    if int(pb.min()) > max_aprime_norm:
        raise BudgetExceeded(f"naive engine: a' bound {int(pb.min())} over budget")
    ident = np.arange(10, dtype=np.int64)
    raw, pts, _, work = _torsor_pass(H, Bint, -1, False, shards, workers,
                               1 << 12 if collect else 0, np.zeros(0), ident)
    u5 = F.n_units**5
    if raw % u5:
        raise AssertionError(f"raw count {raw} not divisible by |mu|^5 = {u5}")
    res = CountResult(F.label, H.spec_hash, Bint, raw // u5, "naive", raw,
                      seconds=time.perf_counter() - t0)
    res.extra["work"] = work.tolist()
    if collect:
        res.points = _to_points(F, pts, 0)
    return res


def count_torsor_reduced(field: FieldSpec | str, H: HeightSpec, B, shards: int = 1,
                         workers: int | None = None, collect: bool = False,
                         wgrid: Sequence[float] | None = None) -> CountResult:
    """Symmetry-reduced count: class m enumerated through s_m with P^(s_m)."""
    F = make_field(field) if isinstance(field, str) else field
    _check_field(F, H)
    Bint = _bint(B)
    t0 = time.perf_counter()
    workers = default_workers() if workers is None else workers
    wg = np.asarray(wgrid if wgrid is not None else [], dtype=np.float64)
    u = F.n_units
    classes = []
    raw = 0
    points = [] if collect else None
    whist = np.zeros(wg.shape[0], dtype=np.int64)
    work = np.zeros(8, dtype=np.int64)
    for m in range(5):
        Hm = weyl_height_spec(H, m)
        perm, _ = weyl_signed_permutation(m)
        cnt, pts, wh, st = _torsor_pass(Hm, Bint, m, True, shards, workers,
                                    1 << 12 if collect else 0, wg,
                                    np.array(perm, dtype=np.int64))
        r = cnt * u**4
        if r % u**5:
            raise AssertionError(f"class {m}: raw count {r} not divisible by |mu|^5")
        classes.append(r // u**5)
        raw += r
        whist += wh
        work += st
        if collect:
            points.extend(_to_points(F, pts, m))
    res = CountResult(F.label, H.spec_hash, Bint, sum(classes), "reduced", raw,
                      classes=tuple(classes), seconds=time.perf_counter() - t0)
    res.points = points
    res.extra["work"] = work.tolist()
    if wg.shape[0]:
        res.extra["wgrid"] = wg.tolist()
        res.extra["whist"] = whist.tolist()
    return res


def _check_field(F: FieldSpec, H: HeightSpec) -> None:
    if H.field.label != F.label:
        raise ValueError(f"height spec built over {H.field.label}, counting over {F.label}")


# ---------------------------------------------------------------------------
# direct oracle


def _direct_box(H: HeightSpec, Bint: int) -> tuple[int, int, int]:
    """|N(y_i)| bounds: y1 = a2 a3 a23 sits inside the monomials with middle
    edge 23, and so on."""
    pb = _middle_bounds(H.monomial_bounds(Bint))
    return int(pb[1, 2]), int(pb[0, 2]), int(pb[0, 1])


def _direct_once(F: FieldSpec, H: HeightSpec, Bint: int, Y: tuple[int, int, int],
                 collect: bool, budget: float):
    deg, T, M = F.kernel_params()
    y1x, y1y, y1n = _element_arrays(F.label, max(Y[0], 1), True)
    ymax = max(Y[1], Y[2], 1)
    ex, ey, en = _element_arrays(F.label, ymax, False)
    work = float(len(y1n)) * float(np.searchsorted(en, Y[1], side="right")) * float(
        np.searchsorted(en, Y[2], side="right"))
    if work > budget:
        raise BudgetExceeded(f"direct box of {work:.3g} triples exceeds budget {budget:.3g}")
    P_cx = np.array([[c[0] for c in f.coeffs] for f in H.forms], dtype=np.int64)
    P_cy = np.array([[c[1] for c in f.coeffs] for f in H.forms], dtype=np.int64)
    cap = 1 << 14 if collect else 0
    out = np.zeros((cap, 3, 2), dtype=np.int64)
    nout = np.zeros(1, dtype=np.int64)
    if deg == 1:
        G = Y[0] + ymax
        tab = kernels.gcd_table(min(G, 2048))

        def run(out, nout):
            return kernels.direct_count_Q(y1x, ex, Y[0], Y[1], Y[2], P_cx, Bint, tab, out, nout)
    else:
        def run(out, nout):
            return kernels.direct_count(deg, T, M, y1x, y1y, y1n, ex, ey, en, Y[0], Y[1], Y[2],
                                        P_cx, P_cy, Bint, out, nout)
    n = int(run(out, nout))
    if collect and nout[0] > cap:
        out = np.zeros((int(nout[0]), 3, 2), dtype=np.int64)
        nout[0] = 0
        n = int(run(out, nout))
    pts = None
    if collect:
        pts = [tuple(F(int(a), int(b)) for a, b in row) for row in out[: int(nout[0])]]
    return n, pts


def count_direct(field: FieldSpec | str, H: HeightSpec, B, mode: str = "provable-box",
                 collect: bool = False, budget: float = 2e9) -> CountResult:
    """Count points of the plane directly (oracle for small B)."""
    F = make_field(field) if isinstance(field, str) else field
    _check_field(F, H)
    Bint = _bint(B)
    t0 = time.perf_counter()
    if mode == "provable-box":
        Y = _direct_box(H, Bint)
        n, pts = _direct_once(F, H, Bint, Y, collect, budget)
    elif mode == "adaptive":
        side = max(1, Bint // 4)
        history = []
        while True:
            n, pts = _direct_once(F, H, Bint, (side, side, side), collect, budget)
            history.append(n)
            if len(history) >= 3 and history[-1] == history[-2] == history[-3]:
                break
            side *= 2
    else:
        raise ValueError(f"unknown mode {mode!r}")
    res = CountResult(F.label, H.spec_hash, Bint, n, f"direct-{mode}", n,
                      seconds=time.perf_counter() - t0)
    if collect:
        res.points = [normalize_plane_point(y) for y in pts]
    return res


# ---------------------------------------------------------------------------
# diagnostics


def w_tail_fraction(field: FieldSpec | str, H: HeightSpec, B, wgrid: Sequence[float],
                    shards: int = 1, workers: int | None = None) -> list[tuple[float, float]]:
    """Fraction of points of height <= B whose W_max exceeds each W."""
    res = count_torsor_reduced(field, H, B, shards=shards, workers=workers, wgrid=wgrid)
    if res.N == 0:
        return [(float(w), 0.0) for w in wgrid]
    # class counts are in units of solutions per unit orbit; the histogram
    # counts normalized a' with all a12, i.e. |mu| solutions per point
    u = make_field(field).n_units if isinstance(field, str) else field.n_units
    total = res.N * u
    return [(float(w), h / total) for w, h in zip(res.extra["wgrid"], res.extra["whist"])]
