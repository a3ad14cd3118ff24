from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from byzfit.dataset import DataSet
from byzfit.errors import FitFailure, NotDivisible
from byzfit.expr import parse_poly
from byzfit.fields import QQ, PrimeField
from byzfit.linsolve import solve
from byzfit.mvwb import MVProblem, mv_noise_enumerate_fit, mv_report, mv_wb_decode, required_sample_size
from byzfit.poly import MultiPoly, divide_by_univariate, evaluate, monomials
from byzfit.wb import NoiseAlphabet, decode_points, locator_system

from instances import TWELVE_POINTS, SEVEN_POINTS, SEVEN_POINTS_TWO_BAD, as_points

P = PrimeField(2**31 - 1)


def test_seven_point_instance():
    res = mv_wb_decode(MVProblem(as_points(SEVEN_POINTS, QQ), 2, 1, 1, QQ))
    assert res.q == parse_poly("x^2 + x*y - 8*x - 8*y", 2)
    assert res.error_locator == parse_poly("x - 8", 2)
    assert res.poly == parse_poly("x + y", 2)
    assert res.flagged == (4,)


def test_second_bad_row_is_rejected():
    # (1, 2, 2) is a second disagreement, beyond t = 1.
    with pytest.raises(NotDivisible):
        mv_wb_decode(MVProblem(as_points(SEVEN_POINTS_TWO_BAD, QQ), 2, 1, 1, QQ))


def test_twelve_point_instance():
    res = mv_wb_decode(MVProblem(as_points(TWELVE_POINTS, QQ), 2, 1, 2, QQ))
    assert res.error_locator == parse_poly("x^2 + x - 2", 2)
    assert res.poly == parse_poly("x + y", 2)
    assert res.q == parse_poly("x*y - 2*y - 2*x + x^2*y + x^2 + x^3", 2)
    assert res.flagged == (0, 1)


def test_bivariate_locator_identity():
    e2 = parse_poly("x + 3/4*y - 5/2", 2)
    assert e2 * parse_poly("x + y", 2) == parse_poly("x^2 + 7/4*x*y - 5/2*x + 3/4*y^2 - 5/2*y", 2)


def test_xy_without_errors():
    p = parse_poly("x*y", 2)
    pts = [((QQ(a), QQ(b)), evaluate(p, (QQ(a), QQ(b)))) for a, b in [(0, 1), (1, 3), (2, 0), (3, 5), (4, 2), (5, 7)]]
    res = mv_wb_decode(MVProblem(pts, 2, 2, 0, QQ))
    assert res.poly == p and res.error_locator == MultiPoly.constant(1, 2)
    for a, b in [(7, -3), (Fraction(1, 2), 9)]:
        assert evaluate(res.poly, (QQ(a), QQ(b))) == a * b


def test_required_sample_size():
    assert required_sample_size(1, 2, 1) == 7
    assert required_sample_size(1, 2, 2) == 12
    assert required_sample_size(0, 1, 0) == 1
    assert required_sample_size(2, 3, 1) == 1 + 20
    with pytest.raises(ValueError):
        required_sample_size(-1, 2, 0)


def test_problem_validation():
    pts = as_points(SEVEN_POINTS, QQ)
    with pytest.raises(ValueError, match="axis 1"):
        MVProblem([((QQ(1), y), z) for (_, y), z in pts], 2, 1, 1, QQ)
    with pytest.raises(ValueError, match="at least 7"):
        MVProblem(pts[:6], 2, 1, 1, QQ)


def test_report_fields():
    rep = mv_report(MVProblem(as_points(SEVEN_POINTS, QQ), 2, 1, 1, QQ))
    assert rep.flagged == [4]
    assert rep.q == rep.model * rep.locator
    doc = rep.to_json()
    assert "locator" in doc and "q" in doc


def _instance(rng, m, d, t, n_extra=0):
    coeffs = {e: P(int(rng.integers(0, P.q))) for e in monomials(m, d)}
    p = MultiPoly(coeffs, m, P)
    n = required_sample_size(d, m, t) + n_extra
    xs = rng.choice(10**6, size=n, replace=False)
    pts = []
    for x0 in xs:
        x = (P(int(x0)),) + tuple(P(int(v)) for v in rng.integers(0, P.q, m - 1))
        pts.append((x, evaluate(p, x)))
    bad = sorted(int(i) for i in rng.choice(n, size=t, replace=False))
    for i in bad:
        x, z = pts[i]
        pts[i] = (x, z + P(int(rng.integers(1, P.q))))
    return p, pts, bad


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 3), st.integers(0, 2), st.integers(0, 2), st.integers(0, 2**32 - 1))
def test_recovery_locator_and_uniqueness(m, d, t, seed):
    rng = np.random.default_rng(seed)
    p, pts, bad = _instance(rng, m, d, t)
    res = mv_wb_decode(MVProblem(pts, m, d, t, P))
    assert res.poly == p and list(res.flagged) == bad
    assert res.q == res.poly * res.error_locator
    assert res.error_locator.degree_in(0) == t == res.error_locator.total_degree
    assert res.error_locator.leading_coeff_in(0) == 1
    for i in bad:
        assert evaluate(res.error_locator, pts[i][0]) == 0
    # Permuting the points and the unknown ordering gives the same quotient.
    perm = rng.permutation(len(pts))
    xs = [pts[i][0] for i in perm]
    zs = [pts[i][1] for i in perm]
    A, b, qmons = locator_system(xs, zs, m, d, t, 0, P)
    cols = rng.permutation(len(A[0]))
    sol = solve([[row[c] for c in cols] for row in A], b, P)
    unpermuted = [None] * len(cols)
    for j, c in enumerate(cols):
        unpermuted[c] = sol[j]
    nq = len(qmons)
    q = MultiPoly(dict(zip(qmons, unpermuted[:nq])), m, P)
    e = MultiPoly.univariate(list(unpermuted[nq:]) + [P.one], 0, m, P)
    quotient, rem = divide_by_univariate(q, e, 0)
    assert rem.is_zero() and quotient == p
    assert decode_points(xs, zs, m, d, t, P).poly == p


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 3), st.integers(0, 2), st.integers(0, 2), st.integers(0, 2**32 - 1))
def test_fail_soundness(m, d, t, seed):
    """With t+1 corruptions the decoder errors or returns the truth; never a wrong fit."""
    rng = np.random.default_rng(seed)
    p, pts, _ = _instance(rng, m, d, t + 1, n_extra=0)
    try:
        res = mv_wb_decode(MVProblem(pts, m, d, t, P))
    except FitFailure:
        return
    assert sum(evaluate(res.poly, x) != z for x, z in pts) <= t


def test_noise_enumeration_x_plus_y():
    p = parse_poly("x + y", 2)
    grid = [(1, 4), (2, 7), (3, 1), (4, 9), (5, 2), (6, 6), (7, 3), (8, 8), (9, 5), (10, 0), (11, 2)]
    noise = {2: 1, 5: -1}
    z = []
    for i, (a, b) in enumerate(grid):
        v = evaluate(p, (QQ(a), QQ(b))) + noise.get(i, 0)
        z.append(v + 17 if i == 8 else v)
    S = DataSet(grid, z, QQ)
    rep = mv_noise_enumerate_fit(S, Fraction(10, 11), 1, NoiseAlphabet.symmetric(1, QQ))
    assert rep.model == p
    assert rep.flagged == [8]


def test_noise_enumeration_zero_alphabet_matches_decode():
    S = DataSet([[x, y] for x, y, _ in SEVEN_POINTS], [z for *_, z in SEVEN_POINTS], QQ)
    rep = mv_noise_enumerate_fit(S, Fraction(6, 7), 1, NoiseAlphabet((QQ(0),), QQ(0)), subset_size=7)
    direct = mv_wb_decode(MVProblem(as_points(SEVEN_POINTS, QQ), 2, 1, 1, QQ))
    assert rep.model == direct.poly and rep.flagged == list(direct.flagged)


def test_noise_enumeration_empty_alphabet():
    with pytest.raises(ValueError):
        NoiseAlphabet((), QQ(0))
