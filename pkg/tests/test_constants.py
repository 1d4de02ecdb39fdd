from __future__ import annotations

import math
from fractions import Fraction

import pytest

from dp5count.constants import (
    ALPHA,
    PrecisionError,
    arch_density_integral,
    arch_density_volume,
    assemble_constant,
    euler_factor,
    euler_factor_poly,
    euler_product,
    fp_point_count,
    fp_point_count_lines,
    tail_log_bound,
)
from dp5count.cubics import weyl_height_spec
from dp5count.nfield import make_field, primes_up_to

# frozen archimedean densities (adaptive cubature over R, RQMC mean +- SE over C)
OMEGA_R = {"sym12": 19.73920915, "std6": 25.5046454}
OMEGA_C = {"sym12": (137.2916, 0.0116), "std6": (212.2599, 0.0113)}


def test_alpha_exact():
    assert ALPHA == Fraction(1, 144)


def test_euler_factor_expansion():
    # (1 - x)^5 (1 + 5x + x^2)
    assert euler_factor_poly() == (1, 0, -14, 35, -35, 14, 0, -1)
    for q in (2, 3, 4, 9, 25, 101):
        x = Fraction(1, q)
        assert euler_factor(q) == sum(c * x**k for k, c in enumerate(euler_factor_poly()))
    with pytest.raises(ValueError):
        euler_factor(1)


def test_point_count_oracle_all_fields(field):
    for P, q in primes_up_to(field, 50):
        n = fp_point_count(field, P)
        assert n == q * q + 5 * q + 1
        assert (1 - Fraction(1, q)) ** 5 * Fraction(n, q * q) == euler_factor(q)


@pytest.mark.parametrize("q", [2, 3, 4, 5, 7, 9, 25, 49])
def test_point_count_by_lines(q):
    # complement of the ten lines counted independently of the plane walk
    assert fp_point_count_lines(q) == q * q + 5 * q + 1


def test_euler_product_frozen_and_nested():
    a = euler_product("Q", 10**5)
    b = euler_product("Q", 10**6)
    assert float(a.value) == pytest.approx(0.01572232803, rel=1e-9)
    assert float(b.value) == pytest.approx(0.0157221664, rel=1e-8)
    # the interval at 10^5 contains the value at 10^6
    assert a.lower <= b.value <= a.upper
    assert b.lower <= b.upper and b.n_factors == 78498


def test_euler_product_tail_bound_quadratic():
    F = make_field("Q(i)")
    fp = euler_product(F, 1000)
    assert fp.tail_log == pytest.approx(tail_log_bound(F, 1000))
    assert 0 < fp.lower < fp.upper < 1


def test_omega_real_cubature(spec):
    for name, v in OMEGA_R.items():
        a = arch_density_integral(spec(name, "Q"))
        assert a.place == "real" and a.method == "cubature-gk21"
        assert a.value == pytest.approx(v, rel=1e-6)
        assert a.rel_error < 1e-6


def test_omega_real_sym12_is_two_pi_squared(spec):
    a = arch_density_integral(spec("sym12", "Q"))
    assert a.value == pytest.approx(2 * math.pi**2, rel=1e-6)


def test_omega_complex_rqmc(spec):
    for name, (v, se) in OMEGA_C.items():
        a = arch_density_integral(spec(name, "Q(i)"), m_log2=13, reps=8, seed=1)
        assert a.place == "complex"
        assert abs(a.value - v) <= 4 * math.hypot(a.error, se)


def test_omega_complex_same_for_every_field(spec):
    vals = [arch_density_integral(spec("sym12", k), m_log2=12, reps=8, seed=2)
            for k in ("Q(sqrt-2)", "Q(sqrt-11)")]
    assert vals[0].value == vals[1].value


def test_volume_method_agrees_real(spec):
    v = arch_density_volume(spec("sym12", "Q"), samples=1_000_000, seed=3)
    assert abs(v.value - OMEGA_R["sym12"]) <= 4 * v.error
    assert v.method == "volume-mc"


def test_weyl_image_same_density(spec):
    H = spec("std6", "Q")
    base = arch_density_integral(H).value
    for s in (1, 2, 3):
        assert arch_density_integral(weyl_height_spec(H, s)).value == pytest.approx(base, rel=1e-6)


def test_assemble_breakdown(spec):
    H = spec("sym12", "Q")
    bd = assemble_constant("Q", H, p_max=10**5)
    d = bd.as_dict()
    assert d["alpha"] == "1/144" and d["1/|disc|"] == "1/1" and d["rho_K^5"] == 1.0
    expect = OMEGA_R["sym12"] * 0.01572232803 / 144
    assert bd.value == pytest.approx(expect, rel=1e-6)
    assert bd.lower <= bd.value <= bd.upper
    with pytest.raises(PrecisionError):
        assemble_constant("Q", H, p_max=10, rtol=1e-6)
    with pytest.raises(ValueError):
        assemble_constant("Q(i)", H)


def test_assemble_gaussian_prefactors(spec):
    H = spec("std6", "Q(i)")
    bd = assemble_constant("Q(i)", H, p_max=10**4, m_log2=11, reps=8)
    assert bd.rho5 == pytest.approx((math.pi / 4) ** 5)
    assert bd.inv_disc == Fraction(1, 4)
