import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from byzfit.errors import Infeasible
from byzfit.simplex import minimize


def _random_lp(rng, n, rows):
    """Random bounded, feasible LP: a box plus random cuts through a known interior point."""
    G = rng.normal(size=(rows, n))
    x0 = rng.uniform(-0.5, 0.5, n)
    h = G @ x0 + rng.uniform(0.01, 1.0, rows)
    box = np.vstack([np.eye(n), -np.eye(n)])
    G = np.vstack([G, box])
    h = np.concatenate([h, np.full(2 * n, 2.0)])
    return rng.normal(size=n), G, h


def test_small_known_optimum():
    # max x + y  s.t.  x + 2y <= 4, 3x + y <= 6, x, y >= 0  ->  (8/5, 6/5)
    G = np.array([[1, 2], [3, 1], [-1, 0], [0, -1]], dtype=float)
    h = np.array([4, 6, 0, 0], dtype=float)
    res = minimize([-1, -1], G, h)
    np.testing.assert_allclose(res.x, [1.6, 1.2], atol=1e-7)
    assert res.objective == pytest.approx(-2.8, abs=1e-7)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(0, 60), st.integers(0, 2**32 - 1))
def test_matches_highs(n, rows, seed):
    rng = np.random.default_rng(seed)
    c, G, h = _random_lp(rng, n, rows)
    ours = minimize(c, G, h)
    ref = linprog(c, A_ub=G, b_ub=h, bounds=[(None, None)] * n, method="highs")
    assert ref.status == 0
    assert ours.objective == pytest.approx(ref.fun, abs=1e-6 * (1 + abs(ref.fun)))
    assert ours.max_violation <= 1e-7 * (1 + np.abs(h).max())


def test_degenerate_duplicated_rows():
    rng = np.random.default_rng(3)
    c, G, h = _random_lp(rng, 4, 20)
    G2, h2 = np.vstack([G, G, G]), np.concatenate([h, h, h])
    assert minimize(c, G2, h2).objective == pytest.approx(minimize(c, G, h).objective, abs=1e-8)


def test_infeasible_certificate():
    # x <= 0 and x >= 1
    G = np.array([[1.0], [-1.0]])
    h = np.array([0.0, -1.0])
    with pytest.raises(Infeasible) as info:
        minimize([1.0], G, h)
    y = np.asarray(info.value.details["certificate"])
    assert np.all(y >= -1e-12)
    np.testing.assert_allclose(G.T @ y, 0, atol=1e-9)
    assert h @ y < 0


def test_infeasible_random_certificate():
    rng = np.random.default_rng(11)
    G = rng.normal(size=(30, 3))
    h = rng.normal(size=30)
    G = np.vstack([G, [[1, 0, 0], [-1, 0, 0]]])
    h = np.concatenate([h, [-1.0, 0.5]])    # x0 <= -1 and x0 >= 0.5
    with pytest.raises(Infeasible) as info:
        minimize(np.ones(3), G, h)
    y = np.asarray(info.value.details["certificate"])
    assert np.all(y >= -1e-12)
    np.testing.assert_allclose(G.T @ y, 0, atol=1e-8 * np.abs(y).max())
    assert h @ y < 0


def test_unbounded_raises():
    with pytest.raises(Infeasible):
        minimize([-1.0], np.array([[-1.0]]), np.array([0.0]))


def test_deterministic():
    rng = np.random.default_rng(5)
    c, G, h = _random_lp(rng, 6, 200)
    a, b = minimize(c, G, h), minimize(c, G, h)
    assert np.array_equal(a.x, b.x) and a.pivots == b.pivots


def test_shape_mismatch():
    with pytest.raises(ValueError):
        minimize([1.0, 2.0], np.ones((3, 2)), np.ones(2))
