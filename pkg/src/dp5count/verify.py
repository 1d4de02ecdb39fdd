"""Executable identity suites with machine-readable pass/fail reports."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import arith, constants
from .cubics import (
    _mod_inverse,
    canonical_spec,
    gcd_identity_holds,
    random_element,
    stress_triples,
)
from .enumerate import count_direct, count_torsor_naive, count_torsor_reduced
from .nfield import FieldSpec, make_field, primes_up_to, ring_gcd
from .torsor import CompletionError, complete_dependent, plucker_residues

CANONICAL = ("sym12", "std6")


@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)


@dataclass
class SuiteReport:
    suite: str
    field: str
    seed: int
    checks: list[Check] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, **detail) -> None:
        self.checks.append(Check(name, bool(passed), detail))

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "field": self.field,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [{"name": c.name, "passed": c.passed, **c.detail} for c in self.checks],
        }


def _F(field: FieldSpec | str) -> FieldSpec:
    return make_field(field) if isinstance(field, str) else field


def suite_gcd(field="Q", seed=0, n=10**4, stress=200, bound=None) -> SuiteReport:
    """The value-gcd identity on random triples and on engineered large gcds."""
    F = _F(field)
    rep = SuiteReport("gcd", F.label, seed)
    rng = random.Random(seed)
    bound = bound or (10**4 if F.degree == 1 else 100)
    triples = [tuple(random_element(F, rng, bound) for _ in range(3)) for _ in range(n)]
    hard = stress_triples(F, stress, seed=seed, max_norm=1000)
    for name in CANONICAL:
        H = canonical_spec(name, F)
        fails = undefined = 0
        for y in triples + hard:
            ok = gcd_identity_holds(H.forms, y)
            if ok is None:
                undefined += 1
            elif not ok:
                fails += 1
        rep.add(f"gcd-identity-{name}", fails == 0, triples=len(triples) + len(hard),
                failures=fails, undefined=undefined)
    return rep


def random_completion(F: FieldSpec, rng: random.Random, bound: int = 30):
    """A random torsor point built so that both congruences hold."""
    while True:
        a = [random_element(F, rng, bound) for _ in range(4)]
        if any(ring_gcd(a[i], a[j]).absnorm() != 1 for i in range(4) for j in range(i + 1, 4)):
            continue
        a1, a2, a3, a4 = a
        a12 = random_element(F, rng, bound)
        r23 = a1 * _mod_inverse(a3, a4) * a12 if not a4.is_unit() else F.zero
        a23 = r23 + a4 * random_element(F, rng, 5)
        r34 = a2 * _mod_inverse(a4, a1) * a23 if not a1.is_unit() else F.zero
        a34 = r34 + a1 * random_element(F, rng, 5)
        try:
            return complete_dependent(a, a12, a23, a34)
        except CompletionError:
            continue


def suite_plucker(field="Q", seed=0, n=10**4) -> SuiteReport:
    """Completions from three free coordinates satisfy all five torsor equations."""
    F = _F(field)
    rep = SuiteReport("plucker", F.label, seed)
    rng = random.Random(seed)
    fails = 0
    for _ in range(n):
        T = random_completion(F, rng)
        if any(not r.is_zero() for r in plucker_residues(T)):
            fails += 1
    rep.add("plucker-redundancy", fails == 0, completions=n, failures=fails)
    return rep


def suite_local(field="Q", seed=0, q_max=100) -> SuiteReport:
    """#U(F_q) = q^2 + 5q + 1 by enumeration, and the Euler factor identity."""
    F = _F(field)
    rep = SuiteReport("local", F.label, seed)
    bad = []
    for P, q in primes_up_to(F, q_max):
        cnt = constants.fp_point_count(F, P)
        lhs = (1 - Fraction(1, q)) ** 5 * Fraction(cnt, q * q)
        if cnt != q * q + 5 * q + 1 or lhs != constants.euler_factor(q):
            bad.append(q)
    rep.add("local-density", not bad, q_max=q_max, failures=bad)
    return rep


def suite_engines(field="Q", seed=0, grid=(50, 100, 200, 500), direct_max=None) -> SuiteReport:
    """direct = naive = reduced, and raw counts divisible by |mu|^5."""
    F = _F(field)
    rep = SuiteReport("engines", F.label, seed)
    u5 = F.n_units ** 5
    direct_max = direct_max if direct_max is not None else max(grid)
    for name in CANONICAL:
        H = canonical_spec(name, F)
        for B in grid:
            n = count_torsor_naive(F, H, B)
            r = count_torsor_reduced(F, H, B)
            d = count_direct(F, H, B).N if B <= direct_max else None
            eq = n.N == r.N and (d is None or d == n.N)
            rep.add(f"equal-{name}-B{B}", eq, direct=d, naive=n.N, reduced=r.N)
            rep.add(f"units-{name}-B{B}", n.raw % u5 == 0 and r.raw % u5 == 0,
                    raw_naive=n.raw, raw_reduced=r.raw, mu5=u5)
    return rep


def suite_mobius(field="Q", seed=0, n=20, B=200, heights="sym12") -> SuiteReport:
    F = _F(field)
    rep = SuiteReport("mobius", F.label, seed)
    rng = np.random.default_rng(seed)
    H = canonical_spec(heights, F)
    for t in range(n):
        a = arith.random_coprime_aprime(F, rng)
        r = arith.mobius_identity_check(F, H, a, B)
        rep.add(f"mobius-{t}", r.ok, aprime=[list(k) for k in r.aprime], lhs=r.lhs, rhs=r.rhs,
                box_points=r.box_points)
    return rep


def suite_theta(field="Q", seed=0, n=10, T1=1000, factor=10.0) -> SuiteReport:
    F = _F(field)
    rep = SuiteReport("theta", F.label, seed)
    rng = np.random.default_rng(seed)
    for t in range(n):
        a = arith.random_coprime_aprime(F, rng, max_norm=30)
        tr = arith.theta_bruteforce(a, T1)
        ev = arith.theta_euler(a)
        bound = arith.theta_truncation_bound(a, T1)
        diff = abs(float(tr.value) - float(ev.value))
        # the Euler value is itself an interval; use its far end
        diff_far = max(abs(float(tr.value) - float(ev.lower)), diff)
        rep.add(f"theta-{t}", diff_far <= factor * bound, aprime=[list(x.key()) for x in a],
                truncated=float(tr.value), euler=float(ev.value), diff=diff,
                bound=bound, method=tr.method)
    return rep


def suite_v1(field="Q", seed=0, samples=10**7) -> SuiteReport:
    rep = SuiteReport("v1", "-", seed)
    v = arith.v1_exact()
    target = Fraction(1, 180)
    rep.add("v1-exact-equals-1/180", v == target, exact=str(v))
    mc, se = arith.v1_monte_carlo(samples, seed)
    rep.add("v1-mc-within-1pct-of-1/180", abs(mc - float(target)) <= 0.01 * float(target),
            mc=mc, se=se)
    rep.add("v1-mc-within-1pct-of-exact", abs(mc - float(v)) <= 0.01 * float(v), mc=mc, se=se)
    rep.add("v1-equals-3alpha/5", v == Fraction(3, 5) * constants.ALPHA, exact=str(v),
            three_alpha_fifths=str(Fraction(3, 5) * constants.ALPHA))
    return rep


SUITES: dict[str, Callable[..., SuiteReport]] = {
    "gcd": suite_gcd,
    "plucker": suite_plucker,
    "local": suite_local,
    "engines": suite_engines,
    "mobius": suite_mobius,
    "theta": suite_theta,
    "v1": suite_v1,
}


def run_suite(name: str, field="Q", seed=0, **kw) -> SuiteReport:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    t0 = time.perf_counter()
    rep = SUITES[name](field=field, seed=seed, **kw)
    rep.seconds = time.perf_counter() - t0
    return rep
