"""Sparse multivariate polynomials over a :mod:`byzfit.fields` field.

Exponent vectors are tuples of non-negative ints; the canonical monomial order
is graded lex, highest first (``x^2, x*y, y^2, x, y, 1`` for two variables).
That order drives serialization and the column layout of every linear system
assembled by the decoders.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from itertools import combinations_with_replacement

import numpy as np

from .errors import KindMismatch
from .fields import QQ, Field, RR, field_from_spec

NEG_INF = -math.inf  # total degree of the zero polynomial

_INT64_MAX = 2**63 - 1


def graded_lex_key(exp: Sequence[int]):
    return (sum(exp), tuple(exp))


def monomials(k: int, d: int) -> list[tuple[int, ...]]:
    """All exponent vectors in ``k`` variables of total degree <= ``d``, graded lex descending."""
    if k < 1 or d < 0:
        raise ValueError("need k >= 1 and d >= 0")
    out = []
    for deg in range(d, -1, -1):
        block = []
        for combo in combinations_with_replacement(range(k), deg):
            exp = [0] * k
            for v in combo:
                exp[v] += 1
            block.append(tuple(exp))
        block.sort(reverse=True)
        out.extend(block)
    return out


def count_monomials(d: int, m: int) -> int:
    """Number of monomials of total degree <= d in m variables, C(d+m, d)."""
    if d < 0 or m < 1:
        raise ValueError("need d >= 0 and m >= 1")
    n = math.comb(d + m, d)
    if n > _INT64_MAX:
        raise OverflowError(f"C({d + m}, {d}) exceeds the 64-bit range")
    return n


def _var_names(k):
    if k <= 3:
        return "xyz"[:k]
    return [f"x{i + 1}" for i in range(k)]


class MultiPoly:
    """Immutable polynomial ``sum coeff * x^exp`` with no stored zero coefficients."""

    __slots__ = ("vars", "field", "_terms")

    def __init__(self, terms: Mapping[Sequence[int], object] | None = None, vars: int = 1, field: Field = QQ):
        if vars < 1:
            raise ValueError("vars must be >= 1")
        clean = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != vars or any(e < 0 for e in exp):
                raise ValueError(f"bad exponent vector {exp} for {vars} variables")
            c = field.check(c)
            if c != 0:
                clean[exp] = clean.get(exp, field.zero) + c
                if clean[exp] == 0:
                    del clean[exp]
        object.__setattr__(self, "vars", vars)
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "_terms", clean)

    def __setattr__(self, *_):
        raise AttributeError("MultiPoly is immutable")

    # construction helpers
    @classmethod
    def zero(cls, vars=1, field=QQ):
        return cls({}, vars, field)

    @classmethod
    def constant(cls, c, vars=1, field=QQ):
        return cls({(0,) * vars: c}, vars, field)

    @classmethod
    def variable(cls, i, vars=1, field=QQ):
        exp = [0] * vars
        exp[i] = 1
        return cls({tuple(exp): 1}, vars, field)

    @classmethod
    def univariate(cls, coeffs: Sequence, axis=0, vars=1, field=QQ):
        """Build from low-to-high coefficients in the variable ``axis``."""
        terms = {}
        for j, c in enumerate(coeffs):
            exp = [0] * vars
            exp[axis] = j
            terms[tuple(exp)] = c
        return cls(terms, vars, field)

    # inspection
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        """(exponent, coeff) pairs in canonical graded-lex-descending order."""
        return sorted(self._terms.items(), key=lambda kv: graded_lex_key(kv[0]), reverse=True)

    def coeff(self, exp):
        return self._terms.get(tuple(exp), self.field.zero)

    def is_zero(self):
        return not self._terms

    @property
    def total_degree(self):
        if not self._terms:
            return NEG_INF
        return max(sum(e) for e in self._terms)

    def degree_in(self, axis: int):
        if not self._terms:
            return NEG_INF
        return max(e[axis] for e in self._terms)

    def is_univariate_in(self, axis: int) -> bool:
        return all(all(v == 0 for i, v in enumerate(e) if i != axis) for e in self._terms)

    def leading_coeff_in(self, axis: int):
        """Coefficient of x_axis^deg for a polynomial univariate in ``axis``."""
        deg = self.degree_in(axis)
        exp = [0] * self.vars
        exp[axis] = deg
        return self.coeff(exp)

    # arithmetic
    def _compatible(self, other):
        if isinstance(other, MultiPoly):
            if other.field != self.field:
                raise KindMismatch(f"{self.field!r} polynomial vs {other.field!r} polynomial")
            if other.vars != self.vars:
                raise ValueError(f"{self.vars}-variate vs {other.vars}-variate polynomial")
            return other
        return MultiPoly.constant(self.field.check(other), self.vars, self.field)

    def __add__(self, other):
        other = self._compatible(other)
        terms = dict(self._terms)
        for e, c in other._terms.items():
            terms[e] = terms.get(e, self.field.zero) + c
        return MultiPoly(terms, self.vars, self.field)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly({e: -c for e, c in self._terms.items()}, self.vars, self.field)

    def __sub__(self, other):
        return self + (-self._compatible(other))

    def __rsub__(self, other):
        return self._compatible(other) - self

    def __mul__(self, other):
        other = self._compatible(other)
        terms: dict = {}
        zero = self.field.zero
        for ea, ca in self._terms.items():
            for eb, cb in other._terms.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                terms[e] = terms.get(e, zero) + ca * cb
        return MultiPoly(terms, self.vars, self.field)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        out = MultiPoly.constant(1, self.vars, self.field)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.vars == other.vars and self.field == other.field and self._terms == other._terms

    def __hash__(self):
        return hash((self.vars, self.field, frozenset(self._terms.items())))

    def __call__(self, *point):
        if len(point) == 1 and isinstance(point[0], (list, tuple, np.ndarray)):
            point = point[0]
        return evaluate(self, point)

    def map_coeffs(self, fn, field: Field | None = None):
        field = field or self.field
        return MultiPoly({e: fn(c) for e, c in self._terms.items()}, self.vars, field)

    # display / serialization
    def __str__(self):
        if not self._terms:
            return "0"
        names = _var_names(self.vars)
        parts = []
        for exp, c in self.items():
            mono = "*".join(n if p == 1 else f"{n}^{p}" for n, p in zip(names, exp) if p)
            cs = self.field.format(c)
            if not mono:
                parts.append(cs)
            elif cs == "1":
                parts.append(mono)
            elif cs == "-1":
                parts.append("-" + mono)
            else:
                parts.append(f"{cs}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"MultiPoly({self}, vars={self.vars}, field={self.field!r})"

    def to_json(self) -> dict:
        doc = {"vars": self.vars, "field": self.field.name}
        if self.field.modulus is not None:
            doc["modulus"] = self.field.modulus
        doc["basis"] = "monomial"
        doc["terms"] = [{"exp": list(e), "coeff": self.field.to_json(c)} for e, c in self.items()]
        return doc

    @classmethod
    def from_json(cls, doc: Mapping) -> "MultiPoly":
        if doc.get("basis", "monomial") != "monomial":
            raise ValueError("not a monomial-basis polynomial")
        field = field_from_spec(doc["field"], doc.get("modulus"))
        terms = {tuple(t["exp"]): field.from_json(t["coeff"]) for t in doc["terms"]}
        return cls(terms, int(doc["vars"]), field)


def evaluate(p: MultiPoly, point: Sequence):
    """Exact (or float, for RR) value of ``p`` at ``point``."""
    if len(point) != p.vars:
        raise ValueError(f"point has {len(point)} coordinates, polynomial has {p.vars} variables")
    pt = [p.field.check(v) for v in point]
    acc = p.field.zero
    powers = [[p.field.one] for _ in range(p.vars)]
    for exp, c in p._terms.items():
        term = c
        for i, e in enumerate(exp):
            if e:
                pw = powers[i]
                while len(pw) <= e:
                    pw.append(pw[-1] * pt[i])
                term = term * pw[e]
        acc = acc + term
    return acc


def mul(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    return a * b


def evaluate_many(p: MultiPoly, X) -> np.ndarray:
    """Vectorized float evaluation at the rows of ``X`` (shape (N, vars))."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != p.vars:
        raise ValueError("X must have shape (N, vars)")
    out = np.zeros(len(X))
    for exp, c in p._terms.items():
        out += float(c) * np.prod(X ** np.asarray(exp, dtype=float), axis=1)
    return out


def divide_by_univariate(q: MultiPoly, e: MultiPoly, axis: int = 0):
    """Long division of ``q`` by ``e`` treating ``x_axis`` as the variable.

    Other variables ride along as coefficients.  Returns ``(quotient,
    remainder)`` with ``q == quotient * e + remainder`` and the remainder's
    degree in ``x_axis`` below ``deg(e)``.
    """
    e = q._compatible(e)
    if e.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if not e.is_univariate_in(axis):
        raise ValueError(f"divisor is not univariate in variable {axis}")
    de = e.degree_in(axis)
    lc = e.leading_coeff_in(axis)
    try:
        lc_inv = q.field.one / lc
    except ZeroDivisionError as exc:
        raise ValueError("leading coefficient of the divisor is not invertible") from exc
    e_terms = [(exp[axis], c) for exp, c in e._terms.items()]
    field = q.field
    rem = dict(q._terms)
    quot: dict = {}
    while True:
        live = [exp for exp in rem if exp[axis] >= de]
        if not live:
            break
        lead = max(live, key=lambda ex: (ex[axis], graded_lex_key(ex)))
        c = rem[lead] * lc_inv
        qexp = list(lead)
        qexp[axis] -= de
        qexp = tuple(qexp)
        quot[qexp] = quot.get(qexp, field.zero) + c
        for j, ec in e_terms:
            tgt = list(qexp)
            tgt[axis] += j
            tgt = tuple(tgt)
            v = rem.get(tgt, field.zero) - c * ec
            if v == 0 or tgt == lead:
                rem.pop(tgt, None)
            else:
                rem[tgt] = v
    return MultiPoly(quot, q.vars, field), MultiPoly(rem, q.vars, field)


def to_float(p: MultiPoly) -> MultiPoly:
    if p.field is RR:
        return p
    return p.map_coeffs(float, RR)
