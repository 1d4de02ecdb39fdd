from __future__ import annotations

import random

import pytest

from dp5count.cubics import canonical_spec, weyl_height_spec
from dp5count.nfield import make_field
from dp5count.torsor import (
    COPRIME_PAIRS,
    CongruenceFailure,
    OnLines,
    apply_s,
    complete_dependent,
    coprimality_check,
    from_surface_point,
    height_surface,
    height_torsor,
    normalize_plane_point,
    plucker_residues,
    sym_quantities,
    to_surface_point,
    w_stats,
)
from dp5count.verify import random_completion


def test_coprime_pairs_complement_is_petersen():
    """The ten lines meet along the Petersen graph; all other pairs are coprime."""
    assert len(COPRIME_PAIRS) == 30
    allowed = {(u, v) for u in range(10) for v in range(u + 1, 10)} - set(COPRIME_PAIRS)
    assert len(allowed) == 15
    deg = [sum(c in e for e in allowed) for c in range(10)]
    assert deg == [3] * 10
    adj = {c: {v for e in allowed for v in e if c in e and v != c} for c in range(10)}
    # girth 5: no triangles and no 4-cycles
    assert all(not (adj[u] & adj[v]) for u, v in allowed)
    assert all(len(adj[u] & adj[v]) <= 1 for u in range(10) for v in range(u + 1, 10))


def test_completion_from_a_known_point():
    Q = make_field("Q")
    T = from_surface_point([Q(2), Q(3), Q(5)])
    assert all(r.is_zero() for r in plucker_residues(T))
    assert to_surface_point(T).y == (Q(2), Q(3), Q(5))
    assert coprimality_check(T)


def test_completion_rejects_bad_congruence():
    Q = make_field("Q")
    with pytest.raises(CongruenceFailure):
        complete_dependent((Q(1), Q(1), Q(1), Q(2)), Q(1), Q(2), Q(1))


def test_lines_rejected():
    Q = make_field("Q")
    for y in ((1, 1, 0), (0, 2, 3), (4, 4, 7), (1, 2, 2)):
        with pytest.raises(OnLines):
            from_surface_point([Q(v) for v in y])


def test_round_trip_and_heights(field):
    rng = random.Random(7)
    H = canonical_spec("sym12", field)
    seen = 0
    while seen < 60:
        T = random_completion(field, rng, 12)
        if not coprimality_check(T):
            continue
        seen += 1
        y = to_surface_point(T)
        T2 = from_surface_point(y)
        assert to_surface_point(T2) == y
        assert height_torsor(T, H) == height_surface(y.y, H) == height_torsor(T2, H)


def test_weyl_swaps_symmetry_quantities(field):
    rng = random.Random(8)
    for _ in range(30):
        T = random_completion(field, rng, 12)
        n = sym_quantities(T).n
        for i in (1, 2, 3, 4):
            m = list(sym_quantities(apply_s(T, i)).n)
            m[0], m[i] = m[i], m[0]
            assert tuple(m) == n
            assert apply_s(apply_s(T, i), i) == T


def test_height_invariant_under_weyl_with_image_spec():
    rng = random.Random(9)
    F = make_field("Q(sqrt-7)")
    H = canonical_spec("std6", F)
    for _ in range(30):
        T = random_completion(F, rng, 12)
        for i in (1, 2, 3, 4):
            assert height_torsor(apply_s(T, i), H) == height_torsor(T, weyl_height_spec(H, i))


def test_normalize_plane_point_units():
    G = make_field("Q(i)")
    p = normalize_plane_point([G(0, 2), G(0, 4), G(0, 6)])
    assert p.y == (G(1), G(2), G(3)) and p.in_V


def test_w_stats_at_typical_size():
    Q = make_field("Q")
    T = from_surface_point([Q(2), Q(3), Q(5)])
    s = w_stats(T, 1.0)
    # all a_i = 1: B_ij = B^(1/3)
    assert all(abs(b - 1.0) < 1e-12 for b in s.B_ij)
    assert s.W_max == max(abs(c.x) for c in T.coords[4:])
