"""Polynomials over GF(2).

A polynomial is stored as a non-negative Python integer whose bit ``i`` is
the coefficient of ``x**i``.  Python integers have arbitrary length, so a
full frame error pattern (a thousand or more bits) is just another value.

:class:`Gf2Poly` is a thin immutable wrapper used at API boundaries.  Hot
loops elsewhere in the package work on the raw integers through the
underscore helpers in this module.
"""

from __future__ import annotations

import re

__all__ = [
    "Gf2Poly",
    "add",
    "mul",
    "poly_divmod",
    "gcd",
    "reverse",
    "divides",
    "parse_power_list",
    "from_koopman",
    "to_koopman",
]


def _degree(a: int) -> int:
    # caller guarantees a != 0
    return a.bit_length() - 1


def _mul(a: int, b: int) -> int:
    if a < b:
        a, b = b, a
    c = 0
    while b:
        if b & 1:
            c ^= a
        a <<= 1
        b >>= 1
    return c


def _divmod(a: int, b: int) -> tuple[int, int]:
    if b == 0:
        raise ZeroDivisionError("division by the zero polynomial")
    db = b.bit_length()
    q = 0
    while a.bit_length() >= db:
        shift = a.bit_length() - db
        q |= 1 << shift
        a ^= b << shift
    return q, a


def _mod(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError("division by the zero polynomial")
    db = b.bit_length()
    while a.bit_length() >= db:
        a ^= b << (a.bit_length() - db)
    return a


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, _mod(a, b)
    return a


def _reverse(a: int, width: int) -> int:
    if a.bit_length() > width:
        raise ValueError(f"polynomial of degree {_degree(a)} does not fit in width {width}")
    return int(format(a, f"0{width}b")[::-1], 2) if width else 0


class Gf2Poly:
    """Immutable binary polynomial.

    ``Gf2Poly(0b1011)`` is ``x^3 + x + 1``.  The zero polynomial has
    ``degree`` equal to ``None`` rather than a negative integer, so it can
    never leak into length arithmetic by accident.
    """

    __slots__ = ("_value",)

    def __init__(self, value: int = 0):
        if isinstance(value, Gf2Poly):
            value = value.value
        value = int(value)
        if value < 0:
            raise ValueError("coefficient word must be non-negative")
        object.__setattr__(self, "_value", value)

    def __setattr__(self, name, value):
        raise AttributeError("Gf2Poly is immutable")

    @property
    def value(self) -> int:
        return self._value

    @property
    def degree(self) -> int | None:
        return None if self._value == 0 else _degree(self._value)

    @property
    def weight(self) -> int:
        return self._value.bit_count()

    def is_zero(self) -> bool:
        return self._value == 0

    def coefficients(self, width: int | None = None) -> list[int]:
        """Coefficient list, index ``i`` holding the coefficient of ``x**i``."""
        if width is None:
            width = self._value.bit_length()
        return [(self._value >> i) & 1 for i in range(width)]

    @classmethod
    def from_coefficients(cls, coeffs) -> Gf2Poly:
        v = 0
        for i, c in enumerate(coeffs):
            if c & 1:
                v |= 1 << i
        return cls(v)

    @classmethod
    def from_bits_msb_first(cls, bits) -> Gf2Poly:
        """First bit is the highest-degree coefficient (first in time)."""
        v = 0
        for b in bits:
            v = (v << 1) | (int(b) & 1)
        return cls(v)

    def to_bits_msb_first(self, length: int) -> list[int]:
        if self._value.bit_length() > length:
            raise ValueError("polynomial too long for requested bit count")
        return [(self._value >> i) & 1 for i in range(length - 1, -1, -1)]

    @classmethod
    def parse(cls, text: str) -> Gf2Poly:
        return parse_power_list(text)

    def __add__(self, other):
        return Gf2Poly(self._value ^ Gf2Poly(other).value)

    __radd__ = __add__
    __sub__ = __add__
    __xor__ = __add__

    def __mul__(self, other):
        return Gf2Poly(_mul(self._value, Gf2Poly(other).value))

    __rmul__ = __mul__

    def __divmod__(self, other):
        q, r = _divmod(self._value, Gf2Poly(other).value)
        return Gf2Poly(q), Gf2Poly(r)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return Gf2Poly(_mod(self._value, Gf2Poly(other).value))

    def __lshift__(self, k: int):
        return Gf2Poly(self._value << k)

    def __eq__(self, other):
        if isinstance(other, Gf2Poly):
            return self._value == other._value
        if isinstance(other, int):
            return self._value == other
        return NotImplemented

    def __hash__(self):
        return hash(("Gf2Poly", self._value))

    def __bool__(self):
        return self._value != 0

    def __int__(self):
        return self._value

    def __repr__(self):
        return f"Gf2Poly({self})"

    def __str__(self):
        if self._value == 0:
            return "0"
        terms = []
        for i in range(_degree(self._value), -1, -1):
            if (self._value >> i) & 1:
                terms.append("1" if i == 0 else "x" if i == 1 else f"x^{i}")
        return "+".join(terms)


def add(a, b) -> Gf2Poly:
    return Gf2Poly(a) + Gf2Poly(b)


def mul(a, b) -> Gf2Poly:
    """Carry-less product."""
    return Gf2Poly(a) * Gf2Poly(b)


def poly_divmod(a, b) -> tuple[Gf2Poly, Gf2Poly]:
    """Return ``(quotient, remainder)`` with ``a = quotient*b + remainder``.

    Raises ``ZeroDivisionError`` when ``b`` is the zero polynomial.
    """
    return divmod(Gf2Poly(a), Gf2Poly(b))


def gcd(a, b) -> Gf2Poly:
    a, b = Gf2Poly(a).value, Gf2Poly(b).value
    if a == 0 and b == 0:
        raise ValueError("gcd(0, 0) is undefined")
    return Gf2Poly(_gcd(a, b))


def reverse(a, width: int) -> Gf2Poly:
    """Mirror the coefficients: ``x**i`` becomes ``x**(width-1-i)``."""
    return Gf2Poly(_reverse(Gf2Poly(a).value, width))


def divides(p, a) -> bool:
    p = Gf2Poly(p).value
    if p == 0:
        raise ZeroDivisionError("divisibility by the zero polynomial")
    return _mod(Gf2Poly(a).value, p) == 0


_TERM = re.compile(r"^(?:1|x(?:\^(\d+))?)$")


def parse_power_list(text: str) -> Gf2Poly:
    """Parse ``"x^3+x+1"``.  Repeated terms cancel, as they should in GF(2)."""
    s = text.replace(" ", "").replace("**", "^")
    if s == "0":
        return Gf2Poly(0)
    v = 0
    for term in s.split("+"):
        m = _TERM.match(term)
        if not m:
            raise ValueError(f"cannot parse polynomial term {term!r}")
        if term == "1":
            v ^= 1
        else:
            v ^= 1 << (int(m.group(1)) if m.group(1) else 1)
    return Gf2Poly(v)


def from_koopman(value: int, degree: int) -> Gf2Poly:
    """Koopman hex: bits ``m-1..0`` hold the coefficients of ``x^m..x^1``.

    The ``x^0`` coefficient is implied.  ``from_koopman(0xEA, 8)`` is
    ``x^8+x^7+x^6+x^4+x^2+1``.
    """
    if degree < 1:
        raise ValueError("CRC degree must be at least 1")
    if not (1 << (degree - 1)) <= value < (1 << degree):
        raise ValueError(f"0x{value:X} is not a degree-{degree} Koopman word")
    return Gf2Poly((value << 1) | 1)


def to_koopman(p) -> int:
    v = Gf2Poly(p).value
    if not v & 1:
        raise ValueError("Koopman notation needs a unit constant term")
    return v >> 1
