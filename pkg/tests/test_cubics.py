from __future__ import annotations

import random
from fractions import Fraction
from pathlib import Path

import pytest

from dp5count.cubics import (
    MONOMIAL_COORDS,
    PATHS,
    AdmissibilityError,
    CubicForm,
    apply_weyl_coords,
    canonical_spec,
    descend,
    dump_height_spec,
    gcd_identity_holds,
    load_height_spec,
    monomial_descent,
    p_sigma,
    q_sigma,
    random_element,
    standard_forms,
    stress_triples,
    symmetric_forms,
    torsor_lift,
    validate_admissible,
    weyl_height_spec,
)
from dp5count.nfield import make_field
from dp5count.torsor import TorsorPoint, plucker_residues
from dp5count.verify import random_completion

BASE_POINTS = ((1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1))


def test_p_sigma_shape():
    # Y1 Y2 (Y1 - Y3) for sigma = (1, 2, 3)
    P = p_sigma((1, 2, 3))
    assert P.eval_int(2, 3, 5) == 2 * 3 * (2 - 5)
    Qf = q_sigma((1, 2, 3))
    assert Qf.eval_int(2, 3, 5) == 3 * (2 - 3) * (2 - 5)


@pytest.mark.parametrize("forms", [standard_forms(), symmetric_forms()])
def test_members_vanish_at_base_points(forms):
    for f in forms:
        assert f.vanishing_defects() == []
        assert all(f.eval_int(*p) == 0 for p in BASE_POINTS)


def test_paths_and_monomials():
    assert len(PATHS) == 12 and len(set(MONOMIAL_COORDS)) == 12
    # each monomial has two a_i and three a_ij
    for cs in MONOMIAL_COORDS:
        assert sum(c < 4 for c in cs) == 2 and len(cs) == 5


def test_descend_inverts_lift():
    for f in symmetric_forms():
        assert descend(torsor_lift(f)) == f


def test_monomial_descents_are_the_twelve_forms():
    descents = {monomial_descent(m) for m in range(12)}
    targets = set(symmetric_forms()) | {-f for f in symmetric_forms()}
    assert descents <= targets


@pytest.mark.parametrize("name,size,c_q,c_k", [("std6", 6, 3, 9), ("sym12", 12, 1, 1)])
def test_canonical_specs(name, size, c_q, c_k, field):
    H = canonical_spec(name, field)
    assert len(H) == size
    assert H.c_p() == (c_q if field.degree == 1 else c_k)
    assert H.spec_hash == {"std6": "2385870bfd28", "sym12": "20357d2c0be3"}[name]


def test_gcd_identity_random_and_stress(field):
    rng = random.Random(5)
    H = canonical_spec("std6", field)
    ys = [tuple(random_element(field, rng, 50) for _ in range(3)) for _ in range(300)]
    ys += stress_triples(field, 100, seed=5)
    assert all(gcd_identity_holds(H.forms, y) is not False for y in ys)


def test_inadmissible_sets_rejected():
    std = standard_forms()
    with pytest.raises(AdmissibilityError, match="rank"):
        validate_admissible(std[:5] + [std[0]], "Q")
    cube = CubicForm.from_poly({(3, 0, 0): 1})
    with pytest.raises(AdmissibilityError, match="vanish"):
        validate_admissible(std[:5] + [cube], "Q")
    doubled = [f + f for f in std]
    with pytest.raises(AdmissibilityError):
        validate_admissible(doubled, "Q")


def test_weyl_preserves_torsor_equations(field):
    rng = random.Random(6)
    for _ in range(40):
        T = random_completion(field, rng, 15)
        for i in (1, 2, 3, 4):
            img = apply_weyl_coords(T.coords, i)
            assert all(r.is_zero() for r in plucker_residues(TorsorPoint(tuple(img))))
            assert apply_weyl_coords(img, i) == list(T.coords)


def test_weyl_images_of_standard_set():
    H = canonical_spec("std6", "Q")
    assert weyl_height_spec(H, 4).same_up_to_signs(H)
    for s in (1, 2, 3):
        assert not weyl_height_spec(H, s).same_up_to_signs(H)
    S = canonical_spec("sym12", "Q")
    for s in (1, 2, 3, 4):
        assert weyl_height_spec(S, s).same_up_to_signs(S)


def test_json_roundtrip(tmp_path):
    p = tmp_path / "std6.json"
    dump_height_spec(standard_forms(), p)
    H = load_height_spec(p, "Q(i)")
    assert H.forms == tuple(standard_forms())
    assert H.c_p() == Fraction(9)


def test_shipped_height_files():
    root = Path(__file__).resolve().parents[1] / "data" / "heights"
    for name in ("std6", "sym12"):
        H = load_height_spec(root / f"{name}.json", "Q")
        assert H.spec_hash == canonical_spec(name, "Q").spec_hash
