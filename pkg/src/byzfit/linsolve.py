"""Exact linear solving for the decoders.

``solve(A, b, field)`` returns one solution of ``A x = b`` (free variables set
to zero) or raises :class:`~byzfit.errors.Infeasible`.  Over GF(q) rows are
eliminated with vectorized residue arithmetic; over the rationals the system is
cleared of denominators and reduced by fraction-free (Bareiss) elimination, so
intermediate integers stay bounded by minors of the input.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm

import numpy as np

from .errors import Infeasible
from .fields import GF, Field, PrimeField, RationalField

_INT64_SAFE_MODULUS = 2**31


def solve(A, b, field: Field) -> list:
    A = list(A)
    nrows = len(A)
    if nrows != len(b):
        raise ValueError("row count mismatch between A and b")
    ncols = len(A[0]) if nrows else 0
    if isinstance(field, PrimeField):
        return _solve_mod(A, b, field, ncols)
    if isinstance(field, RationalField):
        return _solve_bareiss(A, b, ncols)
    raise TypeError(f"exact solving needs a rational or prime field, got {field!r}")


def _solve_mod(A, b, field: PrimeField, ncols):
    q = field.q
    dtype = np.int64 if q < _INT64_SAFE_MODULUS else object
    M = np.array([[int(v) % q for v in row] + [int(bi) % q] for row, bi in zip(A, b)], dtype=dtype)
    M = M.reshape(len(A), ncols + 1)
    pivots = []
    r = 0
    for c in range(ncols):
        if r == len(M):
            break
        nz = np.nonzero(M[r:, c])[0]
        if len(nz) == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            M[[r, p]] = M[[p, r]]
        inv = pow(int(M[r, c]), -1, q)
        M[r] = (M[r] * inv) % q
        col = M[:, c].copy()
        col[r] = 0
        mask = col != 0
        if mask.any():
            M[mask] = (M[mask] - np.outer(col[mask], M[r])) % q
        pivots.append(c)
        r += 1
    if np.any(M[r:, ncols] != 0):
        raise Infeasible("linear system is inconsistent", rank=r)
    x = [GF(0, field) for _ in range(ncols)]
    for i, c in enumerate(pivots):
        x[c] = GF(int(M[i, ncols]), field)
    return x


def _solve_bareiss(A, b, ncols):
    rows = []
    for row, bi in zip(A, b):
        vals = [Fraction(v) for v in row] + [Fraction(bi)]
        den = lcm(*(v.denominator for v in vals))
        rows.append([int(v * den) for v in vals])
    M = np.array(rows, dtype=object).reshape(len(rows), ncols + 1)
    nrows = len(M)
    prev = 1
    r = 0
    pivots = []
    for c in range(ncols):
        if r == nrows:
            break
        nz = [i for i in range(r, nrows) if M[i, c] != 0]
        if not nz:
            continue
        p = nz[0]
        if p != r:
            M[[r, p]] = M[[p, r]]
        piv = M[r, c]
        below = M[r + 1:]
        if len(below):
            # every quotient is exact: entries are minors of the input matrix
            M[r + 1:] = (below * piv - np.outer(below[:, c], M[r])) // prev
        prev = piv
        pivots.append(c)
        r += 1
    if any(M[i, ncols] != 0 for i in range(r, nrows)):
        raise Infeasible("linear system is inconsistent", rank=r)
    x = [Fraction(0)] * ncols
    for i in range(r - 1, -1, -1):
        c = pivots[i]
        acc = Fraction(M[i, ncols])
        for j in pivots[i + 1:]:
            acc -= M[i, j] * x[j]
        x[c] = acc / M[i, c]
    return x
