"""Brute-force reference answers for tiny prime fields."""

from itertools import product

from byzfit.poly import MultiPoly, evaluate


def all_polys_1d(field, d):
    for coeffs in product(range(field.q), repeat=d + 1):
        yield MultiPoly.univariate([field(c) for c in coeffs], 0, 1, field)


def within_hamming(field, points, d, t):
    """Every degree <= d polynomial disagreeing with at most t of the points."""
    return [p for p in all_polys_1d(field, d) if sum(evaluate(p, (x,)) != y for x, y in points) <= t]


def satisfying_predicate(field, points, d, delta, need):
    """Degree <= d polynomials with y - p(x) in {-delta..delta} on at least ``need`` points."""
    band = {field(j) for j in range(-delta, delta + 1)}
    return [p for p in all_polys_1d(field, d) if sum((y - evaluate(p, (x,))) in band for x, y in points) >= need]
