from fractions import Fraction
from itertools import product as iproduct

import pytest

from blowupgw.ring import (CohClass, RingError, abelian_surface_ring, build_blowup_point_ring,
                           curve_secant_ring, parse_ring_file, product, triple_product)


def c(t, name, x=1):
    return CohClass.basis(t.index[name], x)


def test_exceptional_square_p2():
    t = build_blowup_point_ring(2, 1)
    assert product(t, c(t, "E1.1"), c(t, "E1.1")) == c(t, "pt", -1)


def test_different_points_multiply_to_zero():
    t = build_blowup_point_ring(3, 2)
    assert not product(t, c(t, "E1.1"), c(t, "E2.1"))


def test_exceptional_pairing_with_line_class():
    t = build_blowup_point_ring(3, 1)
    E = t.index["E1.1"]
    assert t.div_pairing[E] == (0, -1)
    assert t.div_pairing[t.index["H"]] == (1, 0)


def test_cube_of_exceptional_divisor_p3():
    t = build_blowup_point_ring(3, 1)
    assert product(t, c(t, "E1.1"), c(t, "E1.2")) == c(t, "pt")
    assert triple_product(t, c(t, "E1.1"), c(t, "E1.1"), c(t, "E1.1")) == 1


def test_unit_and_mixed_products():
    t = build_blowup_point_ring(2, 1)
    for k in range(len(t.basis)):
        assert product(t, c(t, "one"), CohClass.basis(k)) == CohClass.basis(k)
    assert triple_product(t, c(t, "H"), c(t, "H"), c(t, "one")) == 1
    assert triple_product(t, c(t, "H"), c(t, "E1.1"), c(t, "one")) == 0


def test_canonical_divisor():
    t = build_blowup_point_ring(4, 2)
    assert t.canonical == c(t, "H", -5) + c(t, "E1.1", 3) + c(t, "E2.1", 3)
    assert t.anticanonical == (5, 3, 3)


@pytest.mark.parametrize("r,s", [(2, 0), (2, 3), (3, 2), (4, 2), (5, 1)])
def test_point_ring_axioms(r, s):
    t = build_blowup_point_ring(r, s)
    n = len(t.basis)
    assert t.basis[0].name == "one" and t.basis[-1].name == "pt"
    assert [b.codim for b in t.basis] == sorted(b.codim for b in t.basis)
    for a, b in iproduct(range(n), repeat=2):
        ab = product(t, CohClass.basis(a), CohClass.basis(b))
        assert ab == product(t, CohClass.basis(b), CohClass.basis(a))
        for k, _ in ab.items():
            assert t.codims[k] == t.codims[a] + t.codims[b]
        if t.g[a][b]:
            assert t.codims[a] + t.codims[b] == r
    for i in range(n):
        for j in range(n):
            x = sum(t.g[i][k] * t.ginv[k][j] for k in range(n))
            assert x == (1 if i == j else 0)
    for a, b, cc in iproduct(range(n), repeat=3):
        A, B, C = (CohClass.basis(x) for x in (a, b, cc))
        assert product(t, product(t, A, B), C) == product(t, A, product(t, B, C))


def test_hyperplane_powers():
    t = build_blowup_point_ring(4, 1)
    assert product(t, c(t, "H"), c(t, "H3")) == c(t, "pt")
    assert not product(t, c(t, "H2"), c(t, "H3"))
    assert not product(t, c(t, "H2"), c(t, "E1.2"))


def test_curve_secant_ring():
    t = curve_secant_ring(4, 0)
    assert product(t, c(t, "E"), c(t, "E")) == c(t, "F", 14) + c(t, "H2", -4)
    t = curve_secant_ring(7, 2)
    assert product(t, c(t, "E"), c(t, "H")) == c(t, "F", 7)
    assert t.anticanonical == (4, 1)


def test_abelian_surface_ring():
    t = abelian_surface_ring()
    assert product(t, c(t, "E"), c(t, "gamma")) == c(t, "F", 50) + c(t, "H3", -10)
    assert product(t, c(t, "gamma"), c(t, "gamma")) == c(t, "pt", -10)
    assert t.anticanonical == (5, 1)


SMALL = """
DIM 2
BASIS one 0
BASIS H 1
BASIS E 1
BASIS pt 2
PRODUCT E E = -1*pt
CANONICAL = -3*H + E
CURVEBASIS H' E'
PAIR H H' = 1
PAIR E E' = -1
STRATEGY curve-secant
SEED beta=0,1 classes= value=1
"""


def test_parse_small_ring_matches_builder():
    t = parse_ring_file(SMALL)
    u = build_blowup_point_ring(2, 1)
    for a, b in iproduct(range(4), repeat=2):
        assert t.products[a][b] == u.products[a][b]
    assert t.seeds == {((0, 1), ()): Fraction(1)}


def test_missing_products_is_an_error():
    text = "\n".join(ln for ln in SMALL.splitlines() if not ln.startswith("PRODUCT"))
    # with no declared products E.E defaults to zero and the pairing is singular
    with pytest.raises(RingError):
        parse_ring_file(text)


@pytest.mark.parametrize("bad,msg", [
    ("PRODUCT E E = -1*pt", "PRODUCT E X = 1*pt"),
    ("DIM 2", "DIM two"),
    ("BASIS one 0", "BASIS H 0"),
])
def test_parse_errors_carry_line_numbers(bad, msg):
    with pytest.raises(RingError) as err:
        parse_ring_file(SMALL.replace(bad, msg))
    assert "line" in str(err.value) or err.value.lineno is None


def test_non_associative_table_rejected():
    # (E.E).H = pt but E.(E.H) = 0
    text = """
DIM 3
BASIS one 0
BASIS H 1
BASIS E 1
BASIS H2 2
BASIS F 2
BASIS pt 3
PRODUCT E E = 1*H2
PRODUCT E F = -1*pt
CANONICAL = -4*H + E
CURVEBASIS H' E'
PAIR H H' = 1
PAIR E E' = -1
STRATEGY curve-secant
"""
    with pytest.raises(RingError, match="associative"):
        parse_ring_file(text)


def test_template_parameters_required():
    from importlib import resources
    text = resources.files("blowupgw.data").joinpath("curvesec.ring").read_text()
    with pytest.raises(RingError):
        parse_ring_file(text, {"d": 3})
