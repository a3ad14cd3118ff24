"""Infix polynomial expressions, e.g. ``x + y``, ``3/4*x1^2 - (x2 - 1)*x3``.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*       # "/" only by a constant
    unary  := "-" unary | "+" unary | power
    power  := atom ("^" INT)?
    atom   := NUMBER | VAR | "(" expr ")"
    NUMBER := digits ["." digits]
    VAR    := "x" digits | "x" | "y" | "z"     # x, y, z alias x1, x2, x3

Literals are read exactly (``0.1`` is 1/10) and then mapped into the target
field.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .fields import QQ, Field
from .poly import MultiPoly

_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d*)?|\.\d+)|(x\d+|[xyz])|(\*\*|[-+*/^()]))")
_ALIAS = {"x": 1, "y": 2, "z": 3}


def _tokens(text: str):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"unexpected character {text[pos:].strip()[:1]!r} at {pos} in {text!r}")
        num, var, op = m.groups()
        if num is not None:
            out.append(("num", Fraction(num)))
        elif var is not None:
            i = _ALIAS[var] if var in _ALIAS else int(var[1:])
            if i < 1:
                raise ValueError("variables are numbered from x1")
            out.append(("var", i))
        else:
            out.append(("op", "^" if op == "**" else op))
        pos = m.end()
    return out


def variables_used(text: str) -> int:
    """Largest variable number appearing in ``text`` (0 for a constant)."""
    return max([i for kind, i in _tokens(text) if kind == "var"], default=0)


def parse_poly(text: str, vars: int | None = None, field: Field = QQ) -> MultiPoly:
    """Parse ``text`` into a MultiPoly over ``field`` with ``vars`` variables.

    ``vars`` defaults to the largest variable number used (at least 1).
    """
    toks = _tokens(text)
    if not toks:
        raise ValueError("empty expression")
    used = max([i for kind, i in toks if kind == "var"], default=0)
    k = vars if vars is not None else max(used, 1)
    if used > k:
        raise ValueError(f"expression uses x{used} but only {k} variables are declared")
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else (None, None)

    def take(expected=None):
        nonlocal pos
        tok = peek()
        if tok[0] is None:
            raise ValueError(f"unexpected end of expression in {text!r}")
        if expected is not None and tok != ("op", expected):
            raise ValueError(f"expected {expected!r} in {text!r}")
        pos += 1
        return tok

    def const(c):
        return MultiPoly.constant(field(c), k, field)

    def expr():
        p = term()
        while peek() in (("op", "+"), ("op", "-")):
            op = take()[1]
            q = term()
            p = p + q if op == "+" else p - q
        return p

    def term():
        p = unary()
        while peek() in (("op", "*"), ("op", "/")):
            op = take()[1]
            q = unary()
            if op == "*":
                p = p * q
            else:
                if q.total_degree > 0 or q.is_zero():
                    raise ValueError("division is only allowed by a nonzero constant")
                inv = field.one / q.coeff((0,) * k)
                p = p * const(inv)
        return p

    def unary():
        if peek() == ("op", "-"):
            take()
            return -unary()
        if peek() == ("op", "+"):
            take()
            return unary()
        return power()

    def power():
        p = atom()
        if peek() == ("op", "^"):
            take()
            kind, n = take()
            if kind != "num" or n.denominator != 1:
                raise ValueError("exponent must be a non-negative integer literal")
            p = p ** int(n)
        return p

    def atom():
        kind, val = take()
        if kind == "num":
            return const(val)
        if kind == "var":
            return MultiPoly.variable(val - 1, k, field)
        if val == "(":
            p = expr()
            take(")")
            return p
        raise ValueError(f"unexpected {val!r} in {text!r}")

    p = expr()
    if pos != len(toks):
        raise ValueError(f"trailing input {toks[pos][1]!r} in {text!r}")
    return p
