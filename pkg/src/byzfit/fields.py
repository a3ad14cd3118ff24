"""Scalar fields: exact rationals, prime fields GF(q), and binary64 floats.

A field object is callable and coerces plain Python values into its element
type::

    >>> F = PrimeField(7)
    >>> F(10) + F(5)
    GF7(1)
    >>> QQ("3/4") * 2
    Fraction(3, 2)

Rationals are :class:`fractions.Fraction` (always in lowest terms), floats are
``float``, and prime-field elements are :class:`GF`.  Mixing tagged kinds
raises :class:`~byzfit.errors.KindMismatch`; bare ints are accepted everywhere
as untyped literals.
"""

from __future__ import annotations

import math
import numbers
from fractions import Fraction

from .errors import KindMismatch

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24 (covers all of 2^64)."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _is_int(v) -> bool:
    return isinstance(v, numbers.Integral) and not isinstance(v, bool)


class GF:
    """Element of GF(q); ``value`` is the canonical residue in [0, q)."""

    __slots__ = ("value", "field")

    def __init__(self, value: int, field: "PrimeField"):
        self.value = value % field.q
        self.field = field

    def _other(self, other):
        if isinstance(other, GF):
            if other.field.q != self.field.q:
                raise KindMismatch(f"GF({self.field.q}) vs GF({other.field.q})")
            return other.value
        if _is_int(other):
            return int(other) % self.field.q
        raise KindMismatch(f"GF({self.field.q}) vs {type(other).__name__}")

    def __add__(self, other):
        return GF(self.value + self._other(other), self.field)

    __radd__ = __add__

    def __sub__(self, other):
        return GF(self.value - self._other(other), self.field)

    def __rsub__(self, other):
        return GF(self._other(other) - self.value, self.field)

    def __mul__(self, other):
        return GF(self.value * self._other(other), self.field)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * self.field.inv(self._other(other))

    def __rtruediv__(self, other):
        return GF(self._other(other), self.field) * self.field.inv(self.value)

    def __neg__(self):
        return GF(-self.value, self.field)

    def __pow__(self, e: int):
        if e < 0:
            return GF(pow(self.field.inv(self.value), -e, self.field.q), self.field)
        return GF(pow(self.value, e, self.field.q), self.field)

    def __eq__(self, other):
        if isinstance(other, GF):
            return self.field.q == other.field.q and self.value == other.value
        if _is_int(other):
            return self.value == int(other) % self.field.q
        return NotImplemented

    def __hash__(self):
        return hash((self.field.q, self.value))

    def __bool__(self):
        return self.value != 0

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"GF{self.field.q}({self.value})"

    def __str__(self):
        return str(self.value)


class Field:
    """Common interface.  Subclasses set ``name`` and ``exact``."""

    name = ""
    exact = True
    modulus = None

    def __call__(self, value):
        raise NotImplementedError

    def contains(self, value) -> bool:
        raise NotImplementedError

    @property
    def zero(self):
        return self(0)

    @property
    def one(self):
        return self(1)

    def check(self, value):
        """Coerce ``value`` if it is an int or already of this kind, else raise."""
        if _is_int(value) or self.contains(value):
            return self(value)
        raise KindMismatch(f"{type(value).__name__} value {value!r} is not in {self}")

    def format(self, value) -> str:
        return str(value)

    def parse(self, text: str):
        return self(text.strip())

    def to_json(self, value):
        return self.format(value)

    def from_json(self, value):
        return self(value)

    def __eq__(self, other):
        return isinstance(other, Field) and (self.name, self.modulus) == (other.name, other.modulus)

    def __hash__(self):
        return hash((self.name, self.modulus))


class RationalField(Field):
    name = "rational"

    def __call__(self, value):
        if isinstance(value, GF):
            raise KindMismatch("GF element cannot become a rational")
        if isinstance(value, str):
            return Fraction(value.strip())
        if isinstance(value, float):
            if not math.isfinite(value):
                raise ValueError("non-finite value")
            return Fraction(value)
        return Fraction(value)

    def contains(self, value):
        return isinstance(value, Fraction) or _is_int(value)

    def format(self, value):
        value = Fraction(value)
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"

    def to_json(self, value):
        return self.format(value)

    def __repr__(self):
        return "QQ"


class FloatField(Field):
    name = "float"
    exact = False

    def __call__(self, value):
        if isinstance(value, GF):
            raise KindMismatch("GF element cannot become a float")
        return float(value)

    def contains(self, value):
        return isinstance(value, (float, numbers.Integral)) and not isinstance(value, bool)

    def format(self, value):
        return repr(float(value))

    def to_json(self, value):
        return float(value)

    def __repr__(self):
        return "RR"


class PrimeField(Field):
    name = "gf"

    def __init__(self, q: int):
        q = int(q)
        if not is_prime(q):
            raise ValueError(f"modulus {q} is not prime")
        if q == 2:
            raise ValueError("characteristic 2 is not supported")
        self.q = q
        self.modulus = q

    def __call__(self, value):
        if isinstance(value, GF):
            if value.field.q != self.q:
                raise KindMismatch(f"GF({value.field.q}) element given to GF({self.q})")
            return value
        if isinstance(value, str):
            value = Fraction(value.strip())
        if isinstance(value, Fraction):
            return GF(value.numerator, self) / GF(value.denominator, self)
        if _is_int(value):
            return GF(int(value), self)
        raise KindMismatch(f"{type(value).__name__} cannot become a GF({self.q}) element")

    def contains(self, value):
        return isinstance(value, GF) and value.field.q == self.q

    def inv(self, value: int) -> int:
        value %= self.q
        if value == 0:
            raise ZeroDivisionError(f"0 has no inverse in GF({self.q})")
        return pow(value, -1, self.q)

    def to_json(self, value):
        return int(value)

    def format(self, value):
        return str(int(value))

    def elements(self):
        return [GF(v, self) for v in range(self.q)]

    def __repr__(self):
        return f"GF({self.q})"


QQ = RationalField()
RR = FloatField()


def field_from_spec(name: str, modulus: int | None = None) -> Field:
    """Build a field from its serialized tag (``rational``, ``gf``, ``float``)."""
    if name == "rational":
        return QQ
    if name == "float":
        return RR
    if name == "gf":
        if modulus is None:
            raise ValueError("gf field needs a modulus")
        return PrimeField(modulus)
    raise ValueError(f"unknown field kind {name!r}")
