"""Hot loops of the counting engines.

Everything here works on int64 scalars and numpy arrays so the same source
compiles with numba or runs as plain Python (``DP5_NO_JIT=1``).  Ring
elements are (x, y) pairs meaning x + y*w with w^2 = T*w - M; ``deg == 1``
means Q, where y is always 0.

Overflow discipline: every product that is compared against a bound is
formed only after checking ``a <= bound // b``, so intermediate values stay
below the bound (at most a few times 10^12 for the supported scales).
"""

from __future__ import annotations

import numpy as np

from ._jit import njit

# ---------------------------------------------------------------------------
# ring helpers


@njit(inline="always")
def rmul(ax, ay, bx, by, T, M):
    return ax * bx - M * ay * by, ax * by + ay * bx + T * ay * by


@njit(inline="always")
def rnorm(x, y, T, M, deg):
    if deg == 1:
        return abs(x)
    return x * x + T * x * y + M * y * y


@njit(inline="always")
def round_div(a, b):
    if b < 0:
        a = -a
        b = -b
    return (2 * a + b) // (2 * b)


@njit
def rdivmod(ax, ay, bx, by, T, M, deg):
    """Euclidean quotient and remainder with N(r) < N(b)."""
    if deg == 1:
        q = round_div(ax, bx)
        return q, 0, ax - q * bx, 0
    # a * conj(b)
    cx = bx + T * by
    cy = -by
    nx, ny = rmul(ax, ay, cx, cy, T, M)
    n = bx * bx + T * bx * by + M * by * by
    qy = round_div(ny, n)
    qx = round_div(2 * nx + T * (ny - qy * n), 2 * n)
    px, py = rmul(qx, qy, bx, by, T, M)
    return qx, qy, ax - px, ay - py


@njit
def exact_div(ax, ay, bx, by, T, M, deg):
    """(ok, qx, qy) with q = a / b when b divides a."""
    if deg == 1:
        if ax % bx != 0:
            return False, 0, 0
        return True, ax // bx, 0
    cx = bx + T * by
    cy = -by
    nx, ny = rmul(ax, ay, cx, cy, T, M)
    n = bx * bx + T * bx * by + M * by * by
    if nx % n != 0 or ny % n != 0:
        return False, 0, 0
    return True, nx // n, ny // n


@njit
def igcd(a, b):
    a = abs(a)
    b = abs(b)
    while b:
        a, b = b, a % b
    return a


@njit
def rgcd(ax, ay, bx, by, T, M, deg):
    """A (non-normalized) generator of (a, b)."""
    while bx != 0 or by != 0:
        _, _, rx, ry = rdivmod(ax, ay, bx, by, T, M, deg)
        ax, ay, bx, by = bx, by, rx, ry
    return ax, ay


@njit
def coprime(ax, ay, bx, by, T, M, deg):
    na = rnorm(ax, ay, T, M, deg)
    nb = rnorm(bx, by, T, M, deg)
    if igcd(na, nb) == 1:
        return True
    if deg == 1:
        return False
    gx, gy = rgcd(ax, ay, bx, by, T, M, deg)
    return rnorm(gx, gy, T, M, deg) == 1


@njit
def rinverse_mod(ax, ay, mx, my, T, M, deg):
    """(ok, ix, iy) with i*a = 1 mod m, i reduced mod m."""
    # extended Euclid on (a, m)
    r0x, r0y, r1x, r1y = ax, ay, mx, my
    s0x, s0y, s1x, s1y = 1, 0, 0, 0
    while r1x != 0 or r1y != 0:
        qx, qy, rx, ry = rdivmod(r0x, r0y, r1x, r1y, T, M, deg)
        px, py = rmul(qx, qy, s1x, s1y, T, M)
        r0x, r0y, r1x, r1y = r1x, r1y, rx, ry
        s0x, s0y, s1x, s1y = s1x, s1y, s0x - px, s0y - py
    if rnorm(r0x, r0y, T, M, deg) != 1:
        return False, 0, 0
    # r0 is a unit; its inverse is its conjugate (norm one)
    if deg == 1:
        ix, iy = s0x * r0x, 0
    else:
        ux = r0x + T * r0y
        uy = -r0y
        ix, iy = rmul(s0x, s0y, ux, uy, T, M)
    _, _, rx, ry = rdivmod(ix, iy, mx, my, T, M, deg)
    return True, rx, ry


@njit
def rmod(ax, ay, mx, my, T, M, deg):
    _, _, rx, ry = rdivmod(ax, ay, mx, my, T, M, deg)
    return rx, ry


# ---------------------------------------------------------------------------
# lattice cosets in imaginary quadratic rings


@njit
def ideal_hnf(mx, my, T, M):
    """(e, f, g): the ideal m*O_K is {(x, y): g | y, x = f*(y/g) mod e}."""
    # generators (mx, my) and m*w = (-M*my, mx + T*my)
    a = my
    b = mx + T * my
    # extended gcd on (a, b)
    r0, r1 = a, b
    s0, s1 = 1, 0
    t0, t1 = 0, 1
    while r1 != 0:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if r0 < 0:
        r0, s0, t0 = -r0, -s0, -t0
    g = r0
    n = mx * mx + T * mx * my + M * my * my
    e = n // g
    f = (s0 * mx - t0 * M * my) % e
    return e, f, g


@njit
def coset_points(rx, ry, mx, my, X, T, M, outx, outy):
    """Fill out* with all z = r mod m with N(z) <= X; returns the count.

    When the output buffers are too small the return value is the negative
    of the required size.
    """
    e, f, g = ideal_hnf(mx, my, T, M)
    return _coset_ellipse(rx, ry, e, f, g, X, T, M, outx, outy)


@njit
def _coset_ellipse(rx, ry, e, f, g, X, T, M, outx, outy):
    """``coset_points`` with the ideal given by its HNF (e, f, g)."""
    D = 4 * M - T * T
    ymax = int(np.sqrt(4.0 * X / D)) + 1
    while D * ymax * ymax > 4 * X:
        ymax -= 1
    cnt = 0
    cap = outx.shape[0]
    # y = ry + g*t
    t_lo = -((ymax + ry) // g)
    y = ry + g * t_lo
    while y <= ymax:
        if y >= -ymax:
            R2 = 4 * X - D * y * y
            if R2 >= 0:
                R = int(np.sqrt(float(R2)))
                while R * R > R2:
                    R -= 1
                while (R + 1) * (R + 1) <= R2:
                    R += 1
                lo = -((R + T * y) // 2)
                hi = (R - T * y) // 2
                # x = rx + f*(y - ry)/g + e*s
                base = rx + f * ((y - ry) // g)
                x = lo + ((base - lo) % e)
                while x <= hi:
                    if x != 0 or y != 0:
                        if cnt < cap:
                            outx[cnt] = x
                            outy[cnt] = y
                        cnt += 1
                    x += e
        y += g
    if cnt > cap:
        return -cnt
    return cnt


@njit
def coset_points_disc(rx, ry, e, f, g, cre, cim, R2, T, M, outx, outy):
    """Fill out* with the nonzero z = r mod m (m given by its HNF) whose complex embedding lies
    within a slightly enlarged disc |z - c|^2 <= R2; returns the count.

    The disc is widened by a relative margin far above double rounding, so no
    point is dropped; callers apply the exact tests.  A negative return value is
    the required buffer size, as in ``coset_points``.
    """
    D = 4 * M - T * T
    h = 0.5 * np.sqrt(float(D))
    R = np.sqrt(R2) * (1.0 + 1e-9) + 1e-6 * (1.0 + abs(cre) + abs(cim))
    ylo = np.int64(np.floor((cim - R) / h))
    yhi = np.int64(np.ceil((cim + R) / h))
    cnt = 0
    cap = outx.shape[0]
    y = ylo + ((ry - ylo) % g)
    while y <= yhi:
        dy = y * h - cim
        w2 = R * R - dy * dy
        if w2 >= 0.0:
            w = np.sqrt(w2)
            xc = cre - 0.5 * T * y
            lo = np.int64(np.floor(xc - w))
            hi = np.int64(np.ceil(xc + w))
            base = rx + f * ((y - ry) // g)
            x = lo + ((base - lo) % e)
            while x <= hi:
                if x != 0 or y != 0:
                    if cnt < cap:
                        outx[cnt] = x
                        outy[cnt] = y
                    cnt += 1
                x += e
        y += g
    if cnt > cap:
        return -cnt
    return cnt


@njit(inline="always")
def _cdiv(ux, uy, vx, vy, T, M):
    """Complex embedding of u / v as (re, im)."""
    h = 0.5 * np.sqrt(float(4 * M - T * T))
    ure = ux + 0.5 * T * uy
    uim = uy * h
    vre = vx + 0.5 * T * vy
    vim = vy * h
    d = vre * vre + vim * vim
    return (ure * vre + uim * vim) / d, (uim * vre - ure * vim) / d


# ---------------------------------------------------------------------------
# candidate acceptance


@njit
def edge_bound(e, Nc, known, L, edge_mons, edge_nmons, mon_coords):
    """Largest admissible |N(a_e)| given the known coordinate norms."""
    best = -1
    for t in range(edge_nmons[e]):
        m = edge_mons[e, t]
        lim = L[m]
        prod = 1
        ok = True
        for s in range(5):
            c = mon_coords[m, s]
            if c == e or not known[c]:
                continue
            if Nc[c] > lim // prod:
                ok = False
                break
            prod *= Nc[c]
        b = lim // prod if ok else 0
        if best < 0 or b < best:
            best = b
    if best < 0:
        return 0
    return best


@njit
def _cut_quadratic(A, b, c, K, ivs, niv, tmp):
    """Intersect integer intervals ivs[:niv] with {x : |A x^2 + b x + c| <= K}.

    Returns the new interval count (stored back in ivs); ``tmp`` needs twice
    the rows of ``ivs``.  Roots are found in floating point and widened
    outward, so the result may keep a few extra integers but never drops a
    solution; callers recheck exactly.
    """
    if A == 0:
        if b == 0:
            return niv if abs(c) <= K else 0
        # |b x + c| <= K
        if b > 0:
            lo = -((K + c) // b)
            hi = (K - c) // b
        else:
            lo = -((K - c) // (-b))
            hi = (K + c) // (-b)
        return _intersect_one(ivs, niv, lo, hi)
    if A < 0:
        A = -A
        b = -b
        c = -c
    fa = float(A)
    fb = float(b)
    # upper: A x^2 + b x + c - K <= 0
    d1 = fb * fb - 4.0 * fa * (float(c) - float(K))
    if d1 < 0.0:
        return 0
    r1 = np.sqrt(d1)
    u_lo = (-fb - r1) / (2.0 * fa)
    u_hi = (-fb + r1) / (2.0 * fa)
    lo = np.int64(np.floor(u_lo - 1.0 - 1e-9 * abs(u_lo)))
    hi = np.int64(np.ceil(u_hi + 1.0 + 1e-9 * abs(u_hi)))
    niv = _intersect_one(ivs, niv, lo, hi)
    if niv == 0:
        return 0
    # lower: A x^2 + b x + c + K >= 0 fails strictly inside (s_lo, s_hi)
    d2 = fb * fb - 4.0 * fa * (float(c) + float(K))
    if d2 <= 0.0:
        return niv
    r2 = np.sqrt(d2)
    s_lo = (-fb - r2) / (2.0 * fa)
    s_hi = (-fb + r2) / (2.0 * fa)
    hole_lo = np.int64(np.ceil(s_lo + 1.0 + 1e-9 * abs(s_lo)))
    hole_hi = np.int64(np.floor(s_hi - 1.0 - 1e-9 * abs(s_hi)))
    if hole_lo > hole_hi:
        return niv
    return _remove_hole(ivs, niv, hole_lo, hole_hi, tmp)


@njit(inline="always")
def _fbound(x):
    """An integer >= floor(x) for a float x >= 0 computed with rounding error."""
    if x >= 9.0e18:
        return np.int64(9000000000000000000)
    return np.int64(x * (1.0 + 1e-12)) + 1


@njit
def _class_hole(thr, D, p, q, r, ivs, niv, tmp):
    """Remove the x with D * |(p + q x) / r| < thr (q != 0, exact)."""
    if D >= thr:
        return niv
    R = (thr + D - 1) // D  # need |p + q x| >= R r
    W = R * r
    if q < 0:
        p = -p
        q = -q
    # hole: -W < p + q x < W
    hlo = (-W - p) // q + 1
    hhi = -((p - W) // q) - 1
    if hlo > hhi:
        return niv
    return _remove_hole(ivs, niv, hlo, hhi, tmp)


@njit(inline="always")
def _intersect_one(ivs, niv, lo, hi):
    n = 0
    for k in range(niv):
        a = ivs[k, 0] if ivs[k, 0] > lo else lo
        z = ivs[k, 1] if ivs[k, 1] < hi else hi
        if a <= z:
            ivs[n, 0] = a
            ivs[n, 1] = z
            n += 1
    return n


@njit
def _remove_hole(ivs, niv, hlo, hhi, tmp):
    n = 0
    cap = ivs.shape[0]
    for k in range(niv):
        a = ivs[k, 0]
        z = ivs[k, 1]
        if z < hlo or a > hhi:
            tmp[n, 0] = a
            tmp[n, 1] = z
            n += 1
            continue
        if a < hlo:
            tmp[n, 0] = a
            tmp[n, 1] = hlo - 1
            n += 1
        if z > hhi:
            tmp[n, 0] = hhi + 1
            tmp[n, 1] = z
            n += 1
    if n > cap:
        # too fragmented: keep the hull of the surplus, still a superset
        tmp[cap - 1, 1] = tmp[n - 1, 1]
        n = cap
    for k in range(n):
        ivs[k, 0] = tmp[k, 0]
        ivs[k, 1] = tmp[k, 1]
    return n


@njit
def accept(cx, cy, deg, T, M, L, mon_coords, lift_cx, lift_cy, Bh, mclass,
           cop_pairs, Nc, monx, mony):
    """Exact tests on a completed candidate.

    Returns 1 when it is counted, else the failed test: 0 monomial bound,
    -1 height, -2 symmetry class, -3 coprimality.
    """
    for c in range(10):
        Nc[c] = rnorm(cx[c], cy[c], T, M, deg)
    # every monomial must be within its bound
    for m in range(12):
        lim = L[m]
        prod = 1
        for s in range(5):
            v = Nc[mon_coords[m, s]]
            if v > lim // prod:
                return 0
            prod *= v
    # monomial values
    for m in range(12):
        vx = cx[mon_coords[m, 0]]
        vy = cy[mon_coords[m, 0]]
        for s in range(1, 5):
            c = mon_coords[m, s]
            if deg == 1:
                vx = vx * cx[c]
            else:
                vx, vy = rmul(vx, vy, cx[c], cy[c], T, M)
        monx[m] = vx
        mony[m] = vy
    # height
    for p in range(lift_cx.shape[0]):
        hx = 0
        hy = 0
        for m in range(12):
            ax = lift_cx[p, m]
            ay = lift_cy[p, m]
            if ax == 0 and ay == 0:
                continue
            if deg == 1:
                hx += ax * monx[m]
            else:
                px, py = rmul(ax, ay, monx[m], mony[m], T, M)
                hx += px
                hy += py
        if rnorm(hx, hy, T, M, deg) > Bh:
            return -1
    # symmetry class
    if mclass >= 0:
        n0 = Nc[0] * Nc[1] * Nc[2] * Nc[3]
        for i in range(4):
            # n_{i+1} = N(a_i) * N(three edges avoiding i)
            prod = Nc[i]
            for c in range(4, 10):
                if not _edge_has(c, i):
                    if prod > n0:
                        break
                    prod *= Nc[c]
            if prod < n0:
                return -2
            if prod == n0 and i < mclass:
                return -2
    # coprimality (pairs among a1..a4 were checked by the caller)
    for t in range(cop_pairs.shape[0]):
        u = cop_pairs[t, 0]
        v = cop_pairs[t, 1]
        if not coprime(cx[u], cy[u], cx[v], cy[v], T, M, deg):
            return -3
    return 1


@njit(inline="always")
def _edge_has(c, i):
    # coordinate index c in 4..9 is the edge (12,13,14,23,24,34); i in 0..3
    if c == 4:
        return i == 0 or i == 1
    if c == 5:
        return i == 0 or i == 2
    if c == 6:
        return i == 0 or i == 3
    if c == 7:
        return i == 1 or i == 2
    if c == 8:
        return i == 1 or i == 3
    return i == 2 or i == 3


@njit
def record(cx, cy, Nc, Bf, deg, wgrid, whist, wperm, out, nout):
    """W statistics and optional point capture for a counted candidate.

    ``wperm`` maps coordinates back to the untransformed point (the class-m
    problem enumerates s_m-images), so W is measured on the original point.
    """
    if wgrid.shape[0] > 0:
        n0 = float(Nc[wperm[0]]) * Nc[wperm[1]] * Nc[wperm[2]] * Nc[wperm[3]]
        base = (Bf * n0) ** (1.0 / 3.0)
        wmax = 0.0
        for c in range(4, 10):
            i, j = _edge_ends(c)
            r = float(Nc[wperm[c]]) * Nc[wperm[i]] * Nc[wperm[j]] / base
            if r > wmax:
                wmax = r
        if deg == 2:
            wmax = np.sqrt(wmax)
        for t in range(wgrid.shape[0]):
            if wmax > wgrid[t]:
                whist[t] += 1
    k = nout[0]
    if k < out.shape[0]:
        for c in range(10):
            out[k, c, 0] = cx[c]
            out[k, c, 1] = cy[c]
    nout[0] = k + 1


@njit(inline="always")
def _edge_ends(c):
    if c == 4:
        return 0, 1
    if c == 5:
        return 0, 2
    if c == 6:
        return 0, 3
    if c == 7:
        return 1, 2
    if c == 8:
        return 1, 3
    return 2, 3


# ---------------------------------------------------------------------------
# the torsor engine


@njit
def _inner_Q(cx, cy, Nc, known, L, mon_coords, edge_mons, edge_nmons, lift_cx, lift_cy,
             Bh, mclass, cop_pairs, monx, mony, Bf, wgrid, whist, wperm, out, nout, stats):
    """All (a12, a23, a34) over Q for the a' stored in cx[0:4]."""
    a1 = cx[0]
    a2 = cx[1]
    a3 = cx[2]
    a4 = cx[3]
    m1 = abs(a1)
    m3 = abs(a3)
    m4 = abs(a4)
    n2 = abs(a2)
    n3 = m3
    n4 = m4
    n0 = m1 * n2 * m3 * m4
    count = 0
    for c in range(4, 10):
        known[c] = False
    M12 = edge_bound(4, Nc, known, L, edge_mons, edge_nmons, mon_coords)
    if M12 <= 0:
        return 0
    # inverses for the congruences
    ok3, inv3, _ = rinverse_mod(a3, 0, a4, 0, 0, 0, 1)
    ok4, inv4, _ = rinverse_mod(a4, 0, a1, 0, 0, 0, 1)
    # unknown factors (a13, a14, a34) of each monomial once a12, a23, a24 are fixed
    munk = np.full((12, 2), -1, dtype=np.int64)
    for m in range(12):
        t = 0
        for s5 in range(5):
            c = mon_coords[m, s5]
            if c == 5 or c == 6 or c == 9:
                munk[m, t] = c
                t += 1
    lmax = 0
    for m in range(12):
        if L[m] > lmax:
            lmax = L[m]
    # which of a12, a23, a24 each monomial contains, and its a' part
    has12 = np.zeros(12, dtype=np.bool_)
    has23 = np.zeros(12, dtype=np.bool_)
    has24 = np.zeros(12, dtype=np.bool_)
    kpart = np.ones(12, dtype=np.int64)
    kfix = np.zeros(12, dtype=np.int64)
    for m in range(12):
        for s5 in range(5):
            c = mon_coords[m, s5]
            if c == 4:
                has12[m] = True
            elif c == 7:
                has23[m] = True
            elif c == 8:
                has24[m] = True
            elif c < 4:
                kpart[m] *= abs(cx[c])
        if kpart[m] > L[m]:
            return 0
    kfix0 = np.empty(12, dtype=np.int64)
    for m in range(12):
        kfix0[m] = L[m] // kpart[m]
    # cheap single-unknown cuts first
    order = np.empty(12, dtype=np.int64)
    t = 0
    for nu in range(1, 3):
        for m in range(12):
            if (munk[m, 0] >= 0) + (munk[m, 1] >= 0) == nu:
                order[t] = m
                t += 1
    nord = t
    ivs = np.zeros((8, 2), dtype=np.int64)
    i23 = np.zeros((8, 2), dtype=np.int64)
    tmp = np.zeros((16, 2), dtype=np.int64)
    has13 = np.zeros(12, dtype=np.bool_)
    has14 = np.zeros(12, dtype=np.bool_)
    has34 = np.zeros(12, dtype=np.bool_)
    for m in range(12):
        for tt in range(2):
            if munk[m, tt] == 5:
                has13[m] = True
            elif munk[m, tt] == 6:
                has14[m] = True
            elif munk[m, tt] == 9:
                has34[m] = True
    thr = np.empty(5, dtype=np.int64)
    for j in range(5):
        thr[j] = n0 + (1 if 1 <= j <= mclass else 0)
    for v in range(1, M12 + 1):
        # per monomial: L divided by the factors fixed for this (a', |a12|);
        # edge bounds are minima of these quotients
        M23 = lmax
        M24 = lmax
        M13 = lmax
        M14 = lmax
        M34 = lmax
        for m in range(12):
            k = kfix0[m] // v if has12[m] else kfix0[m]
            kfix[m] = k
            if has23[m] and k < M23:
                M23 = k
            if has24[m] and k < M24:
                M24 = k
            if has13[m] and k < M13:
                M13 = k
            if has14[m] and k < M14:
                M14 = k
            if has34[m] and k < M34:
                M34 = k
        # all of these shrink as |a12| grows
        if M23 <= 0 or M24 <= 0 or M13 <= 0 or M14 <= 0 or M34 <= 0:
            break
        if mclass >= 0:
            # class filter against the upper bounds: n_1 and n_2 do not
            # involve a12, so failure is final; n_3 and n_4 grow with |a12|.
            # Monomials (1234), (1243) with n_1 >= n0 give the sharper
            # |a24| >= thr/(n1 K0), |a23| >= thr/(n1 K1).
            if kfix[0] <= (thr[1] - 1) // (m1 * M24):
                break
            if kfix[1] <= (thr[1] - 1) // (m1 * M23):
                break
            if float(n2) * M13 * M14 * M34 < thr[2] * (1.0 - 1e-12) - 1.0:
                break
            if float(n3) * v * M14 * M24 < thr[3] * (1.0 - 1e-12) - 1.0:
                continue
            if float(n4) * v * M13 * M23 < thr[4] * (1.0 - 1e-12) - 1.0:
                continue
            # Upper bounds on the a23 line (monomial indices follow PATHS):
            # n_4 with (1324) bounds |a24|, n_3 with (1423) bounds |a23|,
            # n_2 with (2314), (2413) against (1234), (1243) bounds |a23|,
            # |a24| and |a23 a24|.
            f2 = float(n2) / thr[2]
            u24 = _fbound(float(n4) * v * kfix[2] / thr[4])
            u23 = _fbound(float(n3) * v * kfix[4] / thr[3])
            u23 = min(u23, _fbound(np.sqrt(f2 * kfix[8] * kfix[0])))
            u24 = min(u24, _fbound(np.sqrt(f2 * kfix[9] * kfix[1])))
            u2324 = min(_fbound(f2 * kfix[8] * kfix[1]), _fbound(f2 * kfix[9] * kfix[0]),
                        M23 * M24)
            if u23 < M23:
                M23 = u23
            if u24 < M24:
                M24 = u24
        # coprimality of a12 with a3, a4 (other pairs are checked later)
        if igcd(v, m3) != 1 or igcd(v, m4) != 1:
            continue
        for sgn in range(2):
            a12 = v if sgn == 0 else -v
            cx[4] = a12
            Nc[4] = v
            stats[1] += 1
            # a24 = (a3*a23 - a1*a12)/a4 with |a24| <= M24
            s = a1 * a12
            w = M24 * m4
            if a3 > 0:
                lo = -((-(s - w)) // a3)
                hi = (s + w) // a3
            else:
                lo = -((-(s + w)) // a3)
                hi = (s - w) // a3
            if lo < -M23:
                lo = -M23
            if hi > M23:
                hi = M23
            i23[0, 0] = lo
            i23[0, 1] = hi
            n23 = 1 if lo <= hi else 0
            if n23 > 0 and mclass >= 0:
                # a34 must satisfy thr <= n1 |a23 a24 a34| and |a34| <= K0/|a23|
                # (monomial (1234)), so |a24| >= thr/(K0 n1); likewise (1243)
                # gives |a23| >= thr/(K1 n1).
                n23 = _class_hole(thr[1], kfix[0] * m1, -s, a3, m4, i23, n23, tmp)
                if n23 > 0:
                    n23 = _class_hole(thr[1], kfix[1] * m1, 0, 1, 1, i23, n23, tmp)
                if n23 > 0:
                    n23 = _cut_quadratic(a3, -s, 0, u2324 * m4, i23, n23, tmp)
            if m4 == 1:
                r23 = 0
            else:
                r23 = (a1 * inv3 * a12) % m4
            for k23 in range(n23):
                lo = i23[k23, 0]
                hi = i23[k23, 1]
                a23 = lo + ((r23 - lo) % m4)
                while a23 <= hi:
                    if a23 == 0:
                        a23 += m4
                        continue
                    stats[2] += 1
                    num = a3 * a23 - s
                    a24 = num // a4
                    if a24 == 0:
                        a23 += m4
                        continue
                    if igcd(abs(a23), m1 * v) != 1 or igcd(abs(a24), m1 * v) != 1:
                        a23 += m4
                        continue
                    cx[7] = a23
                    cx[8] = a24
                    # Every monomial bounds the product of its unknown factors among
                    # a13 = (a2 a23 - a4 a34)/a1, a14 = (a2 a24 - a3 a34)/a1 and a34;
                    # each bound cuts the a34 line to at most two intervals.
                    ivs[0, 0] = -lmax
                    ivs[0, 1] = lmax
                    niv = 1
                    for t in range(nord):
                        m = order[t]
                        K = kfix[m]
                        if has23[m]:
                            K = K // abs(a23)
                        if has24[m]:
                            K = K // abs(a24)
                        if K == 0:
                            niv = 0
                            break
                        A = 0
                        bq = 0
                        cq = 1
                        nu = 0
                        for tt in range(2):
                            u = munk[m, tt]
                            if u < 0:
                                continue
                            if u == 9:
                                pu, qu = 0, 1
                            elif u == 5:
                                pu, qu = a2 * a23, -a4
                                K *= m1
                            else:
                                pu, qu = a2 * a24, -a3
                                K *= m1
                            if nu == 0:
                                bq = qu
                                cq = pu
                            else:
                                A = bq * qu
                                bq, cq = cq * qu + pu * bq, cq * pu
                            nu += 1
                        if nu == 0:
                            continue
                        niv = _cut_quadratic(A, bq, cq, K, ivs, niv, tmp)
                        if niv == 0:
                            break
                    if niv > 0 and mclass >= 0:
                        # class filter n_j >= n0 (strict for j <= mclass) for the
                        # three n_j that are linear in a34: each removes a hole
                        niv = _class_hole(thr[1], m1 * abs(a23) * abs(a24),
                                          0, 1, 1, ivs, niv, tmp)
                        if niv > 0:
                            niv = _class_hole(thr[3], m3 * v * abs(a24),
                                              a2 * a24, -a3, m1, ivs, niv, tmp)
                        if niv > 0:
                            niv = _class_hole(thr[4], m4 * v * abs(a23),
                                              a2 * a23, -a4, m1, ivs, niv, tmp)
                    if niv > 0:
                        if m1 == 1:
                            r34 = 0
                        else:
                            r34 = (a2 * inv4 * a23) % m1
                        for k in range(niv):
                            lo3 = ivs[k, 0]
                            hi3 = ivs[k, 1]
                            a34 = lo3 + ((r34 - lo3) % m1)
                            while a34 <= hi3:
                                if a34 != 0:
                                    a13 = (a2 * a23 - a4 * a34) // a1
                                    a14n = a2 * a24 - a3 * a34
                                    if a13 != 0 and a14n != 0 and a14n % a1 == 0:
                                        cx[5] = a13
                                        cx[6] = a14n // a1
                                        cx[9] = a34
                                        r = accept(cx, cy, 1, 0, 0, L, mon_coords, lift_cx,
                                                   lift_cy, Bh, mclass, cop_pairs, Nc,
                                                   monx, mony)
                                        stats[4 - r] += 1
                                        if r == 1:
                                            count += 1
                                            record(cx, cy, Nc, Bf, 1, wgrid, whist, wperm,
                                                   out, nout)
                                a34 += m1
                    a23 += m4
    return count


@njit
def _inner_K(cx, cy, Nc, known, deg, T, M, L, mon_coords, edge_mons, edge_nmons,
             lift_cx, lift_cy, Bh, mclass, cop_pairs, monx, mony, e_x, e_y, e_n,
             Bf, wgrid, whist, wperm, out, nout, stats, bufs):
    """All (a12, a23, a34) over an imaginary quadratic ring."""
    a1x, a1y = cx[0], cy[0]
    a2x, a2y = cx[1], cy[1]
    a3x, a3y = cx[2], cy[2]
    a4x, a4y = cx[3], cy[3]
    n1 = Nc[0]
    n4 = Nc[3]
    count = 0
    for c in range(4, 10):
        known[c] = False
    M12 = edge_bound(4, Nc, known, L, edge_mons, edge_nmons, mon_coords)
    if M12 <= 0:
        return 0
    ok3, i3x, i3y = rinverse_mod(a3x, a3y, a4x, a4y, T, M, deg)
    ok4, i4x, i4y = rinverse_mod(a4x, a4y, a1x, a1y, T, M, deg)
    # a1 * a3^{-1} mod a4
    c23x, c23y = rmul(a1x, a1y, i3x, i3y, T, M)
    c34x, c34y = rmul(a2x, a2y, i4x, i4y, T, M)
    e4, f4, g4 = ideal_hnf(a4x, a4y, T, M)
    e1, f1, g1 = ideal_hnf(a1x, a1y, T, M)
    buf23x = bufs[0]
    buf23y = bufs[1]
    buf34x = bufs[2]
    buf34y = bufs[3]
    # L divided by the a' part of each monomial; a12 enters through has12
    has12 = np.zeros(12, dtype=np.bool_)
    has23 = np.zeros(12, dtype=np.bool_)
    has24 = np.zeros(12, dtype=np.bool_)
    kfix0 = np.empty(12, dtype=np.int64)
    for m in range(12):
        prod = 1
        for s5 in range(5):
            c = mon_coords[m, s5]
            if c == 4:
                has12[m] = True
            elif c == 7:
                has23[m] = True
            elif c == 8:
                has24[m] = True
            elif c < 4:
                prod *= Nc[c]
        if prod > L[m]:
            return 0
        kfix0[m] = L[m] // prod
    for t12 in range(e_n.shape[0]):
        if e_n[t12] > M12:
            break
        a12x = e_x[t12]
        a12y = e_y[t12]
        cx[4] = a12x
        cy[4] = a12y
        Nc[4] = e_n[t12]
        known[4] = True
        stats[1] += 1
        n12 = e_n[t12]
        M23 = np.int64(1) << 62
        M24 = np.int64(1) << 62
        for m in range(12):
            k = kfix0[m] // n12 if has12[m] else kfix0[m]
            if has23[m] and k < M23:
                M23 = k
            if has24[m] and k < M24:
                M24 = k
        if M23 <= 0 or M24 <= 0:
            known[4] = False
            continue
        if n4 == 1:
            r23x, r23y = 0, 0
        else:
            px, py = rmul(c23x, c23y, a12x, a12y, T, M)
            r23x, r23y = rmod(px, py, a4x, a4y, T, M, deg)
        # a1*a12 is needed for a24
        s_x, s_y = rmul(a1x, a1y, a12x, a12y, T, M)
        # a23 lies in the disc N(a23) <= M23 and, since N(a3 a23 - a1 a12) =
        # N(a4 a24) <= n4 M24, in the disc around a1 a12 / a3; walk the smaller
        r24 = float(M24) * n4 / Nc[2]
        if r24 < M23:
            cre, cim = _cdiv(s_x, s_y, a3x, a3y, T, M)
            n23 = coset_points_disc(r23x, r23y, e4, f4, g4, cre, cim, r24, T, M,
                                    buf23x, buf23y)
            if n23 < 0:
                buf23x = np.zeros(-n23, dtype=np.int64)
                buf23y = np.zeros(-n23, dtype=np.int64)
                n23 = coset_points_disc(r23x, r23y, e4, f4, g4, cre, cim, r24, T, M,
                                        buf23x, buf23y)
        else:
            n23 = _coset_ellipse(r23x, r23y, e4, f4, g4, M23, T, M, buf23x, buf23y)
            if n23 < 0:
                buf23x = np.zeros(-n23, dtype=np.int64)
                buf23y = np.zeros(-n23, dtype=np.int64)
                n23 = _coset_ellipse(r23x, r23y, e4, f4, g4, M23, T, M, buf23x, buf23y)
        for t23 in range(n23):
            a23x = buf23x[t23]
            a23y = buf23y[t23]
            stats[2] += 1
            px, py = rmul(a3x, a3y, a23x, a23y, T, M)
            ok, a24x, a24y = exact_div(px - s_x, py - s_y, a4x, a4y, T, M, deg)
            if not ok or (a24x == 0 and a24y == 0):
                continue
            N24 = rnorm(a24x, a24y, T, M, deg)
            if N24 > M24 or rnorm(a23x, a23y, T, M, deg) > M23:
                continue
            cx[7] = a23x
            cy[7] = a23y
            cx[8] = a24x
            cy[8] = a24y
            Nc[7] = rnorm(a23x, a23y, T, M, deg)
            Nc[8] = N24
            known[7] = True
            known[8] = True
            M34 = edge_bound(9, Nc, known, L, edge_mons, edge_nmons, mon_coords)
            K13 = edge_bound(5, Nc, known, L, edge_mons, edge_nmons, mon_coords)
            K14 = edge_bound(6, Nc, known, L, edge_mons, edge_nmons, mon_coords)
            known[7] = False
            known[8] = False
            if M34 <= 0 or K13 <= 0 or K14 <= 0:
                continue
            if n1 == 1:
                r34x, r34y = 0, 0
            else:
                px, py = rmul(c34x, c34y, a23x, a23y, T, M)
                r34x, r34y = rmod(px, py, a1x, a1y, T, M, deg)
            # a2*a23 and a2*a24 reused below
            u_x, u_y = rmul(a2x, a2y, a23x, a23y, T, M)
            v_x, v_y = rmul(a2x, a2y, a24x, a24y, T, M)
            # a34 lies in three discs: N(a34) <= M34, and around a2 a23 / a4
            # and a2 a24 / a3 from the bounds on a13 and a14; walk the smallest
            r13 = float(K13) * n1 / n4
            r14 = float(K14) * n1 / Nc[2]
            if r13 < M34 or r14 < M34:
                if r13 <= r14:
                    cre, cim = _cdiv(u_x, u_y, a4x, a4y, T, M)
                    rr = r13
                else:
                    cre, cim = _cdiv(v_x, v_y, a3x, a3y, T, M)
                    rr = r14
                n34 = coset_points_disc(r34x, r34y, e1, f1, g1, cre, cim, rr, T, M,
                                        buf34x, buf34y)
                if n34 < 0:
                    buf34x = np.zeros(-n34, dtype=np.int64)
                    buf34y = np.zeros(-n34, dtype=np.int64)
                    n34 = coset_points_disc(r34x, r34y, e1, f1, g1, cre, cim, rr, T, M,
                                            buf34x, buf34y)
            else:
                n34 = _coset_ellipse(r34x, r34y, e1, f1, g1, M34, T, M, buf34x, buf34y)
                if n34 < 0:
                    buf34x = np.zeros(-n34, dtype=np.int64)
                    buf34y = np.zeros(-n34, dtype=np.int64)
                    n34 = _coset_ellipse(r34x, r34y, e1, f1, g1, M34, T, M, buf34x, buf34y)
            for t34 in range(n34):
                a34x = buf34x[t34]
                a34y = buf34y[t34]
                if rnorm(a34x, a34y, T, M, deg) > M34:
                    continue
                px, py = rmul(a4x, a4y, a34x, a34y, T, M)
                ok, a13x, a13y = exact_div(u_x - px, u_y - py, a1x, a1y, T, M, deg)
                if not ok or (a13x == 0 and a13y == 0):
                    continue
                if rnorm(a13x, a13y, T, M, deg) > K13:
                    continue
                px, py = rmul(a3x, a3y, a34x, a34y, T, M)
                ok, a14x, a14y = exact_div(v_x - px, v_y - py, a1x, a1y, T, M, deg)
                if not ok or (a14x == 0 and a14y == 0):
                    continue
                if rnorm(a14x, a14y, T, M, deg) > K14:
                    continue
                cx[5] = a13x
                cy[5] = a13y
                cx[6] = a14x
                cy[6] = a14y
                cx[9] = a34x
                cy[9] = a34y
                r = accept(cx, cy, deg, T, M, L, mon_coords, lift_cx, lift_cy, Bh,
                           mclass, cop_pairs, Nc, monx, mony)
                stats[4 - r] += 1
                if r == 1:
                    count += 1
                    record(cx, cy, Nc, Bf, deg, wgrid, whist, wperm, out, nout)
                Nc[4] = e_n[t12]
        known[4] = False
    return count


@njit
def torsor_count(deg, T, M, a_x, a_y, a_n, e_x, e_y, e_n, L, mon_coords, edge_mons,
                 edge_nmons, lift_cx, lift_cy, Bh, pair_bound, trip_bound, n0max, mclass,
                 cop_pairs, shard, nshards, Bf, wgrid, whist, wperm, out, nout, stats):
    """Count coprime torsor solutions over the a' list (one shard).

    pair_bound[i, j] bounds |N(a_i a_j)|, trip_bound[l] bounds
    |N(a_i a_j a_k)| for the triple avoiding l (negative: unused), n0max
    bounds |N(a1 a2 a3 a4)| (negative: unused).  mclass < 0 disables the
    symmetry filter.  ``stats`` accumulates work counters: a' tuples, a12
    values, a23 values, then completed candidates by outcome (accepted,
    monomial bound, height, symmetry class, coprimality).
    """
    cx = np.zeros(10, dtype=np.int64)
    cy = np.zeros(10, dtype=np.int64)
    Nc = np.zeros(10, dtype=np.int64)
    known = np.zeros(10, dtype=np.bool_)
    monx = np.zeros(12, dtype=np.int64)
    mony = np.zeros(12, dtype=np.int64)
    # coset buffers for the quadratic kernel (grown locally when too small)
    bufs = np.zeros((4, 4096), dtype=np.int64)
    na = a_n.shape[0]
    total = 0
    for i1 in range(na):
        if i1 % nshards != shard:
            continue
        n1 = a_n[i1]
        if n1 > pair_bound[0, 1] or n1 > pair_bound[0, 2] or n1 > pair_bound[0, 3]:
            break
        for i2 in range(na):
            n2 = a_n[i2]
            if n2 > pair_bound[0, 1] // n1:
                break
            if n2 > pair_bound[1, 2] or n2 > pair_bound[1, 3]:
                break
            if not coprime(a_x[i1], a_y[i1], a_x[i2], a_y[i2], T, M, deg):
                continue
            n12 = n1 * n2
            for i3 in range(na):
                n3 = a_n[i3]
                if n3 > pair_bound[0, 2] // n1 or n3 > pair_bound[1, 2] // n2:
                    break
                if n3 > pair_bound[2, 3]:
                    break
                if trip_bound[3] >= 0 and n3 > trip_bound[3] // n12:
                    break
                if not coprime(a_x[i1], a_y[i1], a_x[i3], a_y[i3], T, M, deg):
                    continue
                if not coprime(a_x[i2], a_y[i2], a_x[i3], a_y[i3], T, M, deg):
                    continue
                n123 = n12 * n3
                for i4 in range(na):
                    n4 = a_n[i4]
                    if n4 > pair_bound[0, 3] // n1 or n4 > pair_bound[1, 3] // n2:
                        break
                    if n4 > pair_bound[2, 3] // n3:
                        break
                    if trip_bound[0] >= 0:
                        if n4 > trip_bound[2] // (n1 * n2) or n4 > trip_bound[1] // (n1 * n3):
                            break
                        if n4 > trip_bound[0] // (n2 * n3):
                            break
                    if n0max >= 0 and n4 > n0max // n123:
                        break
                    if not coprime(a_x[i1], a_y[i1], a_x[i4], a_y[i4], T, M, deg):
                        continue
                    if not coprime(a_x[i2], a_y[i2], a_x[i4], a_y[i4], T, M, deg):
                        continue
                    if not coprime(a_x[i3], a_y[i3], a_x[i4], a_y[i4], T, M, deg):
                        continue
                    cx[0] = a_x[i1]
                    cy[0] = a_y[i1]
                    cx[1] = a_x[i2]
                    cy[1] = a_y[i2]
                    cx[2] = a_x[i3]
                    cy[2] = a_y[i3]
                    cx[3] = a_x[i4]
                    cy[3] = a_y[i4]
                    Nc[0] = n1
                    Nc[1] = n2
                    Nc[2] = n3
                    Nc[3] = n4
                    for c in range(4):
                        known[c] = True
                    stats[0] += 1
                    if deg == 1:
                        total += _inner_Q(cx, cy, Nc, known, L, mon_coords, edge_mons,
                                          edge_nmons, lift_cx, lift_cy, Bh, mclass, cop_pairs,
                                          monx, mony, Bf, wgrid, whist, wperm, out, nout, stats)
                    else:
                        total += _inner_K(cx, cy, Nc, known, deg, T, M, L, mon_coords,
                                          edge_mons, edge_nmons, lift_cx, lift_cy, Bh, mclass,
                                          cop_pairs, monx, mony, e_x, e_y, e_n, Bf, wgrid,
                                          whist, wperm, out, nout, stats, bufs)
                    Nc[0] = n1
                    Nc[1] = n2
                    Nc[2] = n3
                    Nc[3] = n4
    return total


# ---------------------------------------------------------------------------
# the direct oracle on the plane


@njit
def direct_count(deg, T, M, y1x, y1y, y1n, ex, ey, en, Y1, Y2, Y3, P_cx, P_cy, B,
                 out, nout):
    """Count primitive (y1:y2:y3) in V with H <= B; y1 runs over a list of
    unit-normalized elements, y2 and y3 over all elements."""
    total = 0
    npm = P_cx.shape[0]
    # exponents of the ten cubic monomials, descending lex
    E = np.array([[3, 0, 0], [2, 1, 0], [2, 0, 1], [1, 2, 0], [1, 1, 1],
                  [1, 0, 2], [0, 3, 0], [0, 2, 1], [0, 1, 2], [0, 0, 3]], dtype=np.int64)
    pwx = np.zeros((3, 4), dtype=np.int64)
    pwy = np.zeros((3, 4), dtype=np.int64)
    for i1 in range(y1n.shape[0]):
        if y1n[i1] > Y1:
            break
        ax = y1x[i1]
        ay = y1y[i1]
        for i2 in range(en.shape[0]):
            if en[i2] > Y2:
                break
            bx = ex[i2]
            by = ey[i2]
            if bx == ax and by == ay:
                continue
            g12x, g12y = rgcd(ax, ay, bx, by, T, M, deg)
            n12 = rnorm(g12x, g12y, T, M, deg)
            for i3 in range(en.shape[0]):
                if en[i3] > Y3:
                    break
                cx_ = ex[i3]
                cy_ = ey[i3]
                if (cx_ == ax and cy_ == ay) or (cx_ == bx and cy_ == by):
                    continue
                # primitivity
                if n12 != 1:
                    gx, gy = rgcd(g12x, g12y, cx_, cy_, T, M, deg)
                    if rnorm(gx, gy, T, M, deg) != 1:
                        continue
                # N(g) = N(gcd(y2,y3) gcd(y1,y3) gcd(y1,y2) gcd(y1-y2, y1-y3))
                gx, gy = rgcd(bx, by, cx_, cy_, T, M, deg)
                ng = rnorm(gx, gy, T, M, deg)
                gx, gy = rgcd(ax, ay, cx_, cy_, T, M, deg)
                ng *= rnorm(gx, gy, T, M, deg)
                ng *= n12
                gx, gy = rgcd(ax - bx, ay - by, ax - cx_, ay - cy_, T, M, deg)
                ng *= rnorm(gx, gy, T, M, deg)
                lim = B * ng
                # powers
                pwx[0, 0] = 1
                pwy[0, 0] = 0
                pwx[1, 0] = 1
                pwy[1, 0] = 0
                pwx[2, 0] = 1
                pwy[2, 0] = 0
                for k in range(1, 4):
                    pwx[0, k], pwy[0, k] = rmul(pwx[0, k - 1], pwy[0, k - 1], ax, ay, T, M)
                    pwx[1, k], pwy[1, k] = rmul(pwx[1, k - 1], pwy[1, k - 1], bx, by, T, M)
                    pwx[2, k], pwy[2, k] = rmul(pwx[2, k - 1], pwy[2, k - 1], cx_, cy_, T, M)
                good = True
                for p in range(npm):
                    vx = 0
                    vy = 0
                    for t in range(10):
                        kx = P_cx[p, t]
                        ky = P_cy[p, t]
                        if kx == 0 and ky == 0:
                            continue
                        mx, my = rmul(pwx[0, E[t, 0]], pwy[0, E[t, 0]],
                                      pwx[1, E[t, 1]], pwy[1, E[t, 1]], T, M)
                        mx, my = rmul(mx, my, pwx[2, E[t, 2]], pwy[2, E[t, 2]], T, M)
                        mx, my = rmul(mx, my, kx, ky, T, M)
                        vx += mx
                        vy += my
                    if rnorm(vx, vy, T, M, deg) > lim:
                        good = False
                        break
                if good:
                    k = nout[0]
                    if k < out.shape[0]:
                        out[k, 0, 0] = ax
                        out[k, 0, 1] = ay
                        out[k, 1, 0] = bx
                        out[k, 1, 1] = by
                        out[k, 2, 0] = cx_
                        out[k, 2, 1] = cy_
                    nout[0] = k + 1
                    total += 1
    return total


@njit(cache=True)
def gcd_table(G):
    """gcd(a, b) for 0 <= a, b <= G, as int16."""
    t = np.zeros((G + 1, G + 1), dtype=np.int16)
    for a in range(G + 1):
        t[a, 0] = a
        t[0, a] = a
    for a in range(1, G + 1):
        for b in range(1, a + 1):
            g = t[a - b, b] if a - b >= b else t[b, a - b]
            t[a, b] = g
            t[b, a] = g
    return t


@njit(inline="always")
def _tgcd(a, b, tab):
    a = abs(a)
    b = abs(b)
    if a < tab.shape[0] and b < tab.shape[0]:
        return np.int64(tab[a, b])
    return igcd(a, b)


@njit(cache=True)
def direct_count_Q(y1v, ev, Y1, Y2, Y3, P_c, B, tab, out, nout):
    """direct_count specialised to Q, same loop order and output.

    For fixed (y1, y2) every form is a cubic in y3 whose four coefficients
    are computed once; gcds of small integers come from a table.
    """
    total = 0
    npm = P_c.shape[0]
    E = np.array([[3, 0, 0], [2, 1, 0], [2, 0, 1], [1, 2, 0], [1, 1, 1],
                  [1, 0, 2], [0, 3, 0], [0, 2, 1], [0, 1, 2], [0, 0, 3]], dtype=np.int64)
    coef = np.zeros((npm, 4), dtype=np.int64)
    for i1 in range(y1v.shape[0]):
        a = y1v[i1]
        if abs(a) > Y1:
            break
        for i2 in range(ev.shape[0]):
            b = ev[i2]
            if abs(b) > Y2:
                break
            if b == a:
                continue
            g12 = _tgcd(a, b, tab)
            for p in range(npm):
                for k in range(4):
                    coef[p, k] = 0
                for t in range(10):
                    k = P_c[p, t]
                    if k != 0:
                        coef[p, E[t, 2]] += k * a ** E[t, 0] * b ** E[t, 1]
            for i3 in range(ev.shape[0]):
                c = ev[i3]
                if abs(c) > Y3:
                    break
                if c == a or c == b:
                    continue
                if g12 != 1 and _tgcd(g12, c, tab) != 1:
                    continue
                ng = g12 * _tgcd(b, c, tab) * _tgcd(a, c, tab) * _tgcd(a - b, a - c, tab)
                lim = B * ng
                good = True
                for p in range(npm):
                    v = ((coef[p, 3] * c + coef[p, 2]) * c + coef[p, 1]) * c + coef[p, 0]
                    if abs(v) > lim:
                        good = False
                        break
                if good:
                    k = nout[0]
                    if k < out.shape[0]:
                        out[k, 0, 0] = a
                        out[k, 1, 0] = b
                        out[k, 2, 0] = c
                    nout[0] = k + 1
                    total += 1
    return total
