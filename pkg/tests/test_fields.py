from fractions import Fraction

import pytest

from byzfit.errors import KindMismatch
from byzfit.fields import GF, QQ, RR, PrimeField, field_from_spec, is_prime


@pytest.mark.parametrize("n", [3, 5, 7, 11, 101, 2**31 - 1, 2**61 - 1, 18446744073709551557])
def test_primes_accepted(n):
    assert is_prime(n)
    assert PrimeField(n).q == n


@pytest.mark.parametrize("n", [0, 1, 4, 9, 561, 2**32 + 1, 3215031751])
def test_composites_rejected(n):
    assert not is_prime(n)
    with pytest.raises(ValueError):
        PrimeField(n)


def test_characteristic_two_rejected():
    with pytest.raises(ValueError):
        PrimeField(2)


def test_gf_arithmetic_and_residues():
    F = PrimeField(7)
    a, b = F(5), F(4)
    assert int(a + b) == 2 and int(a - b) == 1 and int(a * b) == 6
    assert int(a / b) == 3  # 4*3 = 12 = 5
    assert int(-a) == 2 and int(F(-1)) == 6
    assert a**6 == F(1)
    assert int(F(Fraction(1, 2))) == 4
    with pytest.raises(ZeroDivisionError):
        a / F(0)


def test_rationals_lowest_terms():
    v = QQ("-6/4")
    assert (v.numerator, v.denominator) == (-3, 2)
    assert QQ.format(v) == "-3/2"
    assert QQ.parse(QQ.format(v)) == v


def test_kind_mismatch():
    F, G = PrimeField(7), PrimeField(11)
    with pytest.raises(KindMismatch):
        F(1) + G(1)
    with pytest.raises(KindMismatch):
        F(1) + Fraction(1, 2)
    with pytest.raises(KindMismatch):
        QQ(F(3))
    with pytest.raises(KindMismatch):
        QQ.check(0.5)


def test_field_round_trip():
    for fld in (QQ, RR, PrimeField(13)):
        again = field_from_spec(fld.name, fld.modulus)
        assert again == fld
        v = fld(5) / fld(3)
        assert fld.from_json(fld.to_json(v)) == v
    with pytest.raises(ValueError):
        field_from_spec("gf")
    assert isinstance(PrimeField(13)(4), GF)
