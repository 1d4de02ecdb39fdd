from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from dp5count.arith import (
    ScaleError,
    mobius_identity_check,
    polytope_volume,
    random_coprime_aprime,
    theta0,
    theta1,
    theta_bruteforce,
    theta_direct,
    theta_euler,
    theta_truncated_dp,
    theta_truncation_bound,
    torsor_box_points,
    v1_exact,
    v1_monte_carlo,
    v1_volume,
)
from dp5count.constants import ALPHA, euler_product
from dp5count.cubics import canonical_spec
from dp5count.nfield import make_field
from dp5count.torsor import coprimality_check, height_torsor

Q = make_field("Q")


def _a(*xs, F=Q):
    return [F(x) for x in xs]


def test_theta0():
    assert theta0(_a(1, 2, 3, 5)) == 1
    assert theta0(_a(2, 3, 4, 5)) == 0
    G = make_field("Q(i)")
    assert theta0(_a((1, 1), 3, 5, 7, F=G)) == 1
    assert theta0(_a((1, 1), 2, 3, 5, F=G)) == 0


def test_theta_euler_values():
    # only primes dividing a' change: (1-1/q)(1-1/q^2) replaces 1-4/q^2+3/q^3
    t1 = theta_euler(_a(1, 1, 1, 1))
    t2 = theta_euler(_a(2, 1, 1, 1))
    ratio = Fraction(1, 2) * Fraction(3, 4) / (1 - Fraction(4, 4) + Fraction(3, 8))
    assert float(t2.value / t1.value) == pytest.approx(float(ratio), rel=1e-12)
    assert float(t1.value) == pytest.approx(0.177892112490351, rel=1e-12)
    assert 0 < t1.lower <= t1.value <= 1


def test_theta_euler_radical_and_symmetry():
    rng = np.random.default_rng(0)
    for _ in range(10):
        a = random_coprime_aprime(Q, rng, max_norm=12)
        sq = [x * x for x in a]
        assert theta_euler(sq).value == theta_euler(a).value
        assert theta_euler(a[::-1]).value == theta_euler(a).value
    with pytest.raises(ValueError):
        theta_euler(_a(2, 2, 1, 1))


def test_theta_direct_frozen():
    assert theta_direct(_a(1, 1, 1, 1), 10).value == Fraction(1754747, 9261000)
    assert theta_direct(_a(2, 3, 5, 7), 10).value == Fraction(6144, 42875)
    assert theta_direct(_a(2, 3, 5, 1), 10).value == Fraction(192, 1225)


def test_theta_direct_T1_one_is_one():
    assert theta_direct(_a(2, 3, 5, 7), 1).value == 1


@pytest.mark.parametrize("label", ["Q", "Q(i)", "Q(sqrt-3)"])
def test_dp_equals_direct(label):
    F = make_field(label)
    rng = np.random.default_rng(1)
    for T1 in (4, 9, 16):
        a = random_coprime_aprime(F, rng, max_norm=10)
        d = theta_direct(a, T1)
        p = theta_truncated_dp(a, T1)
        assert p.value == pytest.approx(float(d.value), abs=1e-13)


def test_bruteforce_dispatch():
    a = _a(2, 3, 5, 1)
    assert theta_bruteforce(a, 10).method == "direct"
    assert theta_bruteforce(a, 10, method="dp").method == "prime-dp"
    with pytest.raises(ScaleError):
        theta_bruteforce(a, 200, method="direct", max_terms=1000)
    assert theta_bruteforce(a, 200, max_terms=1000).method == "prime-dp"


def test_theta_convergence_table():
    a = _a(2, 3, 5, 1)
    ev = float(theta_euler(a).value)
    diffs = [abs(theta_truncated_dp(a, T).value - ev) for T in (10, 100)]
    bounds = [theta_truncation_bound(a, T) for T in (10, 100)]
    assert diffs[1] < diffs[0]
    assert all(d <= b for d, b in zip(diffs, bounds))
    assert bounds[1] < bounds[0]


def test_box_points_match_coprime_definition():
    H = canonical_spec("sym12", "Q")
    pts = torsor_box_points(_a(1, 1, 1, 1), H, 30)
    assert pts and all(height_torsor(T, H) <= 30 for T in pts)
    assert any(not coprimality_check(T) for T in pts)


@pytest.mark.parametrize("label", ["Q", "Q(i)", "Q(sqrt-7)"])
def test_mobius_identity(label, spec):
    F = make_field(label)
    H = spec("std6", label)
    rng = np.random.default_rng(2)
    for _ in range(3):
        a = random_coprime_aprime(F, rng)
        r = mobius_identity_check(F, H, a, 60)
        assert r.ok and r.lhs == r.rhs


def test_mobius_frozen(spec):
    r = mobius_identity_check(Q, spec("sym12"), _a(1, 1, 1, 1), 60)
    assert (r.lhs, r.rhs, r.box_points) == (120, 120, 264)


def test_theta1_is_the_constant_product():
    a = theta1(10**4)
    b = euler_product("Q", 10**4)
    assert a.value == b.value and a.lower == b.lower


def test_polytope_volume_known_shapes():
    one = Fraction(1)
    cube = ([[one, 0, 0], [-one, 0, 0], [0, one, 0], [0, -one, 0], [0, 0, one], [0, 0, -one]],
            [one, 0, one, 0, one, 0])
    assert polytope_volume(*cube) == 1
    simplex = ([[one] * 4, [-one, 0, 0, 0], [0, -one, 0, 0], [0, 0, -one, 0], [0, 0, 0, -one]],
               [one, 0, 0, 0, 0])
    assert polytope_volume(*simplex) == Fraction(1, 24)
    # a redundant constraint does not change the volume
    assert polytope_volume(cube[0] + [[one, one, 0]], cube[1] + [Fraction(5)]) == 1


def test_v1_exact_value():
    v = v1_exact()
    assert v == Fraction(1, 240)
    assert v == Fraction(3, 5) * ALPHA
    assert v1_volume("exact") == v


def test_v1_monte_carlo():
    mc, se = v1_monte_carlo(10**6, seed=0)
    assert abs(mc - 1 / 240) <= 4 * se
    assert se / mc < 0.005
