from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from byzfit.errors import KindMismatch
from byzfit.expr import parse_poly
from byzfit.fields import QQ, RR, PrimeField
from byzfit.poly import (NEG_INF, MultiPoly, count_monomials, divide_by_univariate, evaluate, monomials, mul,
                         to_float)

from strategies import GF101, fields, polys, scalars

P = lambda s, k=2, f=QQ: parse_poly(s, k, f)  # noqa: E731


def test_eval_examples():
    assert evaluate(P("x+y"), (6, 1)) == 7
    assert evaluate(MultiPoly.zero(2), (3, 4)) == 0
    assert evaluate(P("x^2+x*y-8*x-8*y"), (8, 2)) == 0


def test_eval_errors():
    with pytest.raises(ValueError):
        evaluate(P("x+y"), (1,))
    with pytest.raises(KindMismatch):
        evaluate(P("x+y"), (PrimeField(7)(1), 2))


def test_mul_examples():
    assert mul(P("x-8"), P("x+y")) == P("x^2+x*y-8*x-8*y")
    assert mul(P("x^2+x-2"), P("x+y")) == P("x*y - 2*y - 2*x + x^2*y + x^2 + x^3")
    p = P("3*x^2*y - y + 1/2")
    assert mul(MultiPoly.constant(1, 2), p) == p


def test_bivariate_locator_identity():
    q2 = P("x^2 + 7/4*x*y - 5/2*x + 3/4*y^2 - 5/2*y")
    assert mul(P("x + 3/4*y - 5/2"), P("x+y")) == q2


def test_divide_examples():
    assert divide_by_univariate(P("x^2+x*y-8*x-8*y"), P("x-8")) == (P("x+y"), MultiPoly.zero(2))
    q = P("x^3+x^2*y+x^2+x*y-2*x-2*y")
    assert divide_by_univariate(q, P("x^2+x-2")) == (P("x+y"), MultiPoly.zero(2))
    assert divide_by_univariate(P("x+y"), P("x")) == (MultiPoly.constant(1, 2), P("y"))


def test_divide_errors():
    with pytest.raises(ZeroDivisionError):
        divide_by_univariate(P("x"), MultiPoly.zero(2))
    with pytest.raises(ValueError):
        divide_by_univariate(P("x"), P("x+y"))


def test_divide_other_axis_and_nonmonic():
    q = mul(P("2*y+1"), P("x*y+3"))
    g, r = divide_by_univariate(q, P("2*y+1"), axis=1)
    assert g == P("x*y+3") and r.is_zero()


def test_count_monomials_examples():
    assert count_monomials(1, 2) == 3
    assert count_monomials(2, 2) == 6
    assert monomials(2, 2) == [(2, 0), (1, 1), (0, 2), (1, 0), (0, 1), (0, 0)]
    assert 1 + count_monomials(1 + 1, 2) == 7
    with pytest.raises(OverflowError):
        count_monomials(10**6, 10**3)


@pytest.mark.parametrize("m", range(1, 5))
@pytest.mark.parametrize("d", range(0, 9))
def test_enumeration_cardinality(d, m):
    mons = monomials(m, d)
    assert len(mons) == len(set(mons)) == count_monomials(d, m) == comb(d + m, m)
    assert all(sum(e) <= d for e in mons)


def test_zero_polynomial_invariants():
    z = MultiPoly({(1, 0): 0, (0, 0): Fraction(0)}, 2)
    assert z.is_zero() and z.terms == {}
    assert z.total_degree == NEG_INF
    assert (P("x") - P("x")).is_zero()


def test_mixed_kinds_rejected():
    with pytest.raises(KindMismatch):
        P("x") + P("x", 2, PrimeField(7))


def test_json_round_trip_and_order():
    p = P("3/4*x^2 - x*y + 5")
    doc = p.to_json()
    assert [t["exp"] for t in doc["terms"]] == [[2, 0], [1, 1], [0, 0]]
    assert doc["terms"][0]["coeff"] == "3/4"
    assert MultiPoly.from_json(doc) == p
    g = P("2*x + 10", 2, PrimeField(11))
    assert MultiPoly.from_json(g.to_json()) == g
    assert g.to_json()["modulus"] == 11


def test_to_float():
    f = to_float(P("1/4*x + y"))
    assert f.field == RR and evaluate(f, (1.0, 2.0)) == 2.25


@st.composite
def triples(draw):
    fld = draw(fields)
    k = draw(st.integers(1, 3))
    return fld, draw(polys(fld, k)), draw(polys(fld, k)), draw(polys(fld, k))


@settings(max_examples=1000)
@given(triples())
def test_ring_axioms(t):
    _, a, b, c = t
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a + b == b + a and a * b == b * a
    assert a * (b + c) == a * b + a * c
    assert a - a == MultiPoly.zero(a.vars, a.field)


@settings(max_examples=300)
@given(triples(), st.data())
def test_eval_is_multiplicative(t, data):
    fld, a, b, _ = t
    pt = [fld(data.draw(scalars(fld))) for _ in range(a.vars)]
    assert evaluate(mul(a, b), pt) == evaluate(a, pt) * evaluate(b, pt)
    assert evaluate(a + b, pt) == evaluate(a, pt) + evaluate(b, pt)


@settings(max_examples=300)
@given(fields, st.integers(1, 3), st.integers(0, 4), st.data())
def test_division_identity(fld, k, deg_e, data):
    axis = data.draw(st.integers(0, k - 1))
    low = [fld(data.draw(scalars(fld))) for _ in range(deg_e)]
    e = MultiPoly.univariate(low + [fld.one], axis, k, fld)
    g = data.draw(polys(fld, k))
    r = data.draw(polys(fld, k)).map_coeffs(lambda c: c)
    r = MultiPoly({ex: c for ex, c in r.terms.items() if ex[axis] < deg_e}, k, fld)
    quo, rem = divide_by_univariate(e * g + r, e, axis)
    assert quo == g and rem == r


def test_total_degree_of_product():
    a, b = P("x^2*y + x"), P("y^3 - 1")
    assert mul(a, b).total_degree == a.total_degree + b.total_degree
