from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from byzfit.errors import Infeasible
from byzfit.fields import QQ, PrimeField
from byzfit.linsolve import solve


def _check(A, b, x):
    for row, rhs in zip(A, b):
        assert sum((a * v for a, v in zip(row, x)), start=0 * rhs) == rhs


@st.composite
def systems(draw, field):
    n = draw(st.integers(1, 7))
    rank = draw(st.integers(1, n))
    m = draw(st.integers(rank, 9))
    ints = st.integers(-6, 6)
    B = [[field(draw(ints)) for _ in range(n)] for _ in range(rank)]
    mix = [[field(draw(ints)) for _ in range(rank)] for _ in range(m)]
    A = [[sum((mix[i][r] * B[r][j] for r in range(rank)), start=field.zero) for j in range(n)] for i in range(m)]
    x = [field(draw(ints)) for _ in range(n)]
    b = [sum((a * v for a, v in zip(row, x)), start=field.zero) for row in A]
    return A, b


@settings(max_examples=200)
@given(st.sampled_from([QQ, PrimeField(101), PrimeField(2**61 - 1)]).flatmap(lambda f: systems(f)))
def test_consistent_systems_solved_exactly(sys_):
    A, b = sys_
    fld = QQ if isinstance(b[0], Fraction) else b[0].field
    x = solve(A, b, fld)
    _check(A, b, x)


@pytest.mark.parametrize("field", [QQ, PrimeField(7)])
def test_inconsistent_detected(field):
    A = [[field(1), field(2)], [field(2), field(4)]]
    b = [field(1), field(3)]
    with pytest.raises(Infeasible):
        solve(A, b, field)


def test_free_variables_zero():
    A = [[QQ(1), QQ(1), QQ(0)]]
    x = solve(A, [QQ(5)], QQ)
    assert x == [5, 0, 0]


def test_rational_fractions():
    A = [[Fraction(1, 3), Fraction(1, 2)], [Fraction(2, 5), Fraction(-1, 7)]]
    b = [Fraction(1), Fraction(2)]
    x = solve(A, b, QQ)
    _check(A, b, x)
