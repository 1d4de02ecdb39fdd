from __future__ import annotations

import math
import random

import pytest

from dp5count.nfield import (
    IdealRep,
    LABELS,
    UnsupportedField,
    associates,
    elements_up_to,
    factor,
    make_field,
    primes_above,
    primes_up_to,
    ring_gcd,
    ring_xgcd,
    splitting,
    squarefree_divisors,
    unit_normalize,
)


def _rand(F, rng, b=40):
    while True:
        e = F(rng.randint(-b, b), rng.randint(-b, b) if F.degree == 2 else 0)
        if not e.is_zero():
            return e


def test_labels_and_aliases():
    assert LABELS == ("Q", "Q(i)", "Q(sqrt-2)", "Q(sqrt-3)", "Q(sqrt-7)", "Q(sqrt-11)")
    assert make_field("gaussian").label == "Q(i)"
    assert make_field("Q(√−3)").label == "Q(sqrt-3)"
    assert make_field("Q(sqrt(-7))").label == "Q(sqrt-7)"
    with pytest.raises(UnsupportedField):
        make_field("Q(sqrt-5)")


def test_generator_relation(field):
    if field.degree == 1:
        with pytest.raises(ValueError):
            field(0, 1)
        return
    w = field(0, 1)
    assert w * w == field.trace * w - field.mconst


@pytest.mark.parametrize("label,n_units,disc", [
    ("Q", 2, 1), ("Q(i)", 4, -4), ("Q(sqrt-2)", 2, -8), ("Q(sqrt-3)", 6, -3),
    ("Q(sqrt-7)", 2, -7), ("Q(sqrt-11)", 2, -11),
])
def test_invariants(label, n_units, disc):
    F = make_field(label)
    assert F.n_units == n_units and F.disc == disc
    assert math.isclose(F.rho, F.rho_from_invariants())


def test_residue_constants():
    assert make_field("Q").rho == 1.0
    assert math.isclose(make_field("Q(i)").rho, math.pi / 4)
    assert math.isclose(make_field("Q(sqrt-3)").rho, math.pi / (3 * math.sqrt(3)))


def test_units_have_norm_one(field):
    for u in field.unit_elems():
        assert u.is_unit() and u.absnorm() == 1


def test_norm_multiplicative(field):
    rng = random.Random(1)
    for _ in range(200):
        a, b = _rand(field, rng), _rand(field, rng)
        assert (a * b).absnorm() == a.absnorm() * b.absnorm()


def test_gcd_is_common_divisor_and_bezout(field):
    rng = random.Random(2)
    for _ in range(200):
        a, b = _rand(field, rng), _rand(field, rng)
        g = ring_gcd(a, b)
        assert g.divides(a) and g.divides(b)
        g2, s, t = ring_xgcd(a, b)
        assert s * a + t * b == g2
        assert unit_normalize(g2) == g


def test_gcd_examples():
    Q, G = make_field("Q"), make_field("Q(i)")
    assert ring_gcd(Q(12), Q(-18)) == Q(6)
    # 5 = (2 + i)(2 - i)
    assert ring_gcd(G(5), G(2, 1)) == unit_normalize(G(2, 1))
    assert ring_gcd(G(3), G(2, 1)).absnorm() == 1
    with pytest.raises(ValueError):
        ring_gcd(Q(0), Q(0))


def test_unit_normalize_is_class_function(field):
    rng = random.Random(3)
    for _ in range(100):
        a = _rand(field, rng)
        n = unit_normalize(a)
        assert all(unit_normalize(b) == n for b in associates(a))
        assert n == max(associates(a), key=lambda e: e.key())


def test_elements_up_to_counts():
    # sum_{n <= 10} of the representation counts r(n) of the norm form
    assert len(elements_up_to(make_field("Q"), 10)) == 20
    assert len(elements_up_to(make_field("Q(i)"), 10)) == 36
    assert len(elements_up_to(make_field("Q(i)"), 10, normalized=True)) == 9
    els = elements_up_to(make_field("Q(sqrt-3)"), 30)
    assert all(0 < e.absnorm() <= 30 for e in els)
    assert len(els) == len({e.key() for e in els})


def test_prime_ideal_counts():
    # Q: 25 primes <= 100; Q(i): 2, two ideals above each p = 1 mod 4, and 3, 7 inert
    assert len(primes_up_to(make_field("Q"), 100)) == 25
    assert len(primes_up_to(make_field("Q(i)"), 100)) == 25
    assert [q for _, q in primes_up_to(make_field("Q(i)"), 10)] == [2, 5, 5, 9]


def test_splitting_types():
    G = make_field("Q(i)")
    assert splitting(G, 2) == "ramified"
    assert splitting(G, 3) == "inert"
    assert splitting(G, 5) == "split"
    E = make_field("Q(sqrt-3)")
    assert splitting(E, 3) == "ramified" and splitting(E, 7) == "split"
    assert splitting(E, 2) == "inert"
    for F in (G, E, make_field("Q(sqrt-11)")):
        for p in (2, 3, 5, 7, 11, 13, 101):
            assert math.prod(P.norm for P in primes_above(F, p)) in (p, p * p)


def test_factor_reconstructs(field):
    rng = random.Random(4)
    for _ in range(50):
        a = _rand(field, rng, 60)
        prod = field.one
        for P, e in factor(a):
            prod = prod * P.gen ** e
        assert unit_normalize(prod) == unit_normalize(a)


def test_squarefree_divisors_mobius():
    Q = make_field("Q")
    divs = squarefree_divisors(Q(360))
    assert sorted(int(d) for d, _ in divs) == [1, 2, 3, 5, 6, 10, 15, 30]
    assert sum(m for _, m in divs) == 0


def test_ideal_rep():
    G = make_field("Q(i)")
    I = IdealRep.of(G(0, 3))
    assert I == IdealRep.of(G(3)) and I.norm == 9
    assert I.contains(G(6, 3)) and not I.contains(G(1, 1))
