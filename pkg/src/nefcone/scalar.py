"""Exact scalars: rationals (``fractions.Fraction``) and elements of Q(sqrt d).

Text encoding, shared by the CLI, CSV and JSON output::

    "p" or "p/q"              a rational
    "a+b*sqrt(d)"             a + b*sqrt(d), a and b rational, d squarefree > 1
    "a-b*sqrt(d)"             same with negative b

``format_quad(parse_quad(s))`` is the identity on canonical strings.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Union

from .errors import (
    DomainError,
    FactorizationLimitError,
    IncompatibleFieldError,
    ParseError,
    QuadDivisionByZero,
)

__all__ = [
    "FACTOR_LIMIT",
    "QuadValue",
    "as_fraction",
    "format_quad",
    "format_rational",
    "parse_quad",
    "parse_rational",
    "quad_arith",
    "quad_sign",
    "simplest_rational",
    "sqrt_decompose",
    "sqrt_upper",
    "square_part",
]

# Numerator and denominator of a non-square input to sqrt_decompose must stay
# below this bound.
FACTOR_LIMIT = 2**64

RationalLike = Union[int, Fraction]
_ZERO = Fraction(0)


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, QuadValue):
        return x.to_fraction()
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def square_part(n: int) -> tuple[int, int]:
    """Split a positive integer as ``n = k**2 * d`` with ``d`` squarefree.

    Trial division only runs while ``p**3`` does not exceed the remaining
    cofactor; what is left then has at most two prime factors, so it is
    squarefree unless it is a perfect square.
    """
    if n <= 0:
        raise DomainError(f"square_part needs a positive integer, got {n}")
    r = math.isqrt(n)
    if r * r == n:
        return r, 1
    if n >= FACTOR_LIMIT:
        raise FactorizationLimitError(
            f"{n} exceeds the factorization limit 2**64"
        )
    k, d = 1, 1
    m = n
    p = 2
    while p * p * p <= m:
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            k *= p ** (e // 2)
            if e % 2:
                d *= p
        p += 1 if p == 2 else 2
    r = math.isqrt(m)
    if r * r == m:
        k *= r
    else:
        d *= m
    return k, d


def sqrt_decompose(x) -> tuple[Fraction, int]:
    """Return ``(q, d)`` with ``x == q**2 * d`` and ``d`` squarefree.

    >>> sqrt_decompose(Fraction(8, 9))
    (Fraction(2, 3), 2)
    """
    x = as_fraction(x)
    if x <= 0:
        raise DomainError(f"sqrt_decompose needs a positive rational, got {x}")
    kn, dn = square_part(x.numerator)
    kd, dd = square_part(x.denominator)
    # n/m = kn^2 dn / (kd^2 dd) = (kn / (kd dd))^2 * dn dd; dn, dd are coprime.
    return Fraction(kn, kd * dd), dn * dd


def sqrt_upper(c, bits: int = 32) -> Fraction:
    """A rational ``u`` with ``u > 0`` and ``u**2 > c`` close to ``sqrt(max(c, 0))``."""
    c = as_fraction(c)
    if c < 0:
        return Fraction(1, 2**bits)
    scale = 4**bits
    m = (c.numerator * scale) // c.denominator
    return Fraction(math.isqrt(m) + 1, 2**bits)


def _sign(x) -> int:
    return (x > 0) - (x < 0)


class QuadValue:
    """An exact real number ``a + b*sqrt(d)``.

    Canonical form: ``d`` squarefree, and ``d == 1`` exactly when ``b == 0``.
    Equality is therefore structural.
    """

    __slots__ = ("_a", "_b", "_d")

    def __init__(self, a: RationalLike = 0, b: RationalLike = 0, d: int = 1):
        a = as_fraction(a)
        b = as_fraction(b)
        if not isinstance(d, int) or isinstance(d, bool) or d < 0:
            raise DomainError(f"radicand must be a nonnegative integer, got {d!r}")
        if d == 0 or b == 0:
            b, d = Fraction(0), 1
        elif d > 1:
            k, d = square_part(d)
            b *= k
        if d == 1:
            a, b = a + b, Fraction(0)
        self._a, self._b, self._d = a, b, d

    @classmethod
    def _raw(cls, a: Fraction, b: Fraction, d: int) -> "QuadValue":
        obj = object.__new__(cls)
        if b == 0:
            d = 1
        obj._a, obj._b, obj._d = a, b, d
        return obj

    @classmethod
    def sqrt(cls, x) -> "QuadValue":
        """Exact square root of a positive rational."""
        x = as_fraction(x)
        if x == 0:
            return cls()
        q, d = sqrt_decompose(x)
        if d == 1:
            return cls._raw(q, Fraction(0), 1)
        return cls._raw(Fraction(0), q, d)

    @classmethod
    def coerce(cls, x) -> "QuadValue":
        if isinstance(x, QuadValue):
            return x
        obj = object.__new__(cls)
        obj._a, obj._b, obj._d = as_fraction(x), _ZERO, 1
        return obj

    @property
    def rational_part(self) -> Fraction:
        return self._a

    @property
    def radical_part(self) -> Fraction:
        return self._b

    @property
    def radicand(self) -> int:
        return self._d

    @property
    def is_rational(self) -> bool:
        return self._d == 1

    def to_fraction(self) -> Fraction:
        if self._d != 1:
            raise DomainError(f"{self} is irrational")
        return self._a

    def conjugate(self) -> "QuadValue":
        return QuadValue._raw(self._a, -self._b, self._d)

    def norm(self) -> Fraction:
        return self._a * self._a - self._b * self._b * self._d

    def sign(self) -> int:
        sa, sb = _sign(self._a), _sign(self._b)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: the larger square wins
        diff = self._a * self._a - self._b * self._b * self._d
        if diff > 0:
            return sa
        if diff < 0:
            return sb
        return 0

    def bounds(self, bits: int = 53) -> tuple[Fraction, Fraction]:
        """Rational ``lo <= self <= hi`` with width at most ``|b| * 2**-bits``."""
        if self._d == 1:
            return self._a, self._a
        scale = 2**bits
        r = math.isqrt(self._d * scale * scale)
        lo_s, hi_s = Fraction(r, scale), Fraction(r + 1, scale)
        if self._b > 0:
            return self._a + self._b * lo_s, self._a + self._b * hi_s
        return self._a + self._b * hi_s, self._a + self._b * lo_s

    def __floor__(self) -> int:
        if self._d == 1:
            return math.floor(self._a)
        bits = 16
        while True:
            lo, hi = self.bounds(bits)
            if math.floor(lo) == math.floor(hi):
                return math.floor(lo)
            bits *= 2

    def __ceil__(self) -> int:
        return -math.floor(-self)

    def _field(self, other: "QuadValue") -> int:
        if self._d == 1:
            return other._d
        if other._d == 1 or other._d == self._d:
            return self._d
        raise IncompatibleFieldError(
            f"Q(sqrt {self._d}) and Q(sqrt {other._d}) do not mix"
        )

    def __add__(self, other):
        try:
            other = QuadValue.coerce(other)
        except TypeError:
            return NotImplemented
        if self._d == 1 and other._d == 1:
            return QuadValue._raw(self._a + other._a, _ZERO, 1)
        d = self._field(other)
        return QuadValue._raw(self._a + other._a, self._b + other._b, d)

    __radd__ = __add__

    def __neg__(self):
        return QuadValue._raw(-self._a, -self._b, self._d)

    def __pos__(self):
        return self

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __sub__(self, other):
        try:
            other = QuadValue.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            other = QuadValue.coerce(other)
        except TypeError:
            return NotImplemented
        if self._d == 1 and other._d == 1:
            return QuadValue._raw(self._a * other._a, _ZERO, 1)
        d = self._field(other)
        a = self._a * other._a + self._b * other._b * d
        b = self._a * other._b + self._b * other._a
        return QuadValue._raw(a, b, d)

    __rmul__ = __mul__

    def inverse(self) -> "QuadValue":
        n = self.norm()
        if n == 0:
            raise QuadDivisionByZero("division by zero")
        return QuadValue._raw(self._a / n, -self._b / n, self._d)

    def __truediv__(self, other):
        try:
            other = QuadValue.coerce(other)
        except TypeError:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return QuadValue.coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        out = QuadValue._raw(Fraction(1), Fraction(0), 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, QuadValue):
            return (self._a, self._b, self._d) == (other._a, other._b, other._d)
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self._d == 1 and self._a == other
        return NotImplemented

    def __hash__(self):
        if self._d == 1:
            return hash(self._a)
        return hash((self._a, self._b, self._d))

    def _cmp(self, other) -> int:
        return (self - other).sign()

    def __lt__(self, other):
        try:
            return self._cmp(other) < 0
        except TypeError:
            return NotImplemented

    def __le__(self, other):
        try:
            return self._cmp(other) <= 0
        except TypeError:
            return NotImplemented

    def __gt__(self, other):
        try:
            return self._cmp(other) > 0
        except TypeError:
            return NotImplemented

    def __ge__(self, other):
        try:
            return self._cmp(other) >= 0
        except TypeError:
            return NotImplemented

    def __bool__(self):
        return self._a != 0 or self._b != 0

    def __float__(self):
        return float(self._a) + float(self._b) * math.sqrt(self._d)

    def __repr__(self):
        if self._d == 1:
            return f"QuadValue({self._a!s})"
        return f"QuadValue({self._a!s}, {self._b!s}, {self._d})"

    def __str__(self):
        return format_quad(self)


def quad_arith(a, b, op: str) -> QuadValue:
    """Apply ``op`` in {"add", "sub", "mul", "div"} exactly."""
    a, b = QuadValue.coerce(a), QuadValue.coerce(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise DomainError(f"unknown operation {op!r}")


def quad_sign(a) -> int:
    return QuadValue.coerce(a).sign()


def simplest_rational(lo, hi, lo_closed: bool = False, hi_closed: bool = False) -> Fraction:
    """Simplest rational in the interval between ``lo`` and ``hi``.

    Bounds may be rationals or ``QuadValue`` (from different fields); ``hi``
    may be ``None`` for +infinity. Requires ``0 <= lo`` and a nonempty interval.
    """
    if lo_closed and QuadValue.coerce(lo).is_rational and lo == math.floor(lo):
        return Fraction(math.floor(lo))
    fl = math.floor(lo)
    n = fl + 1
    if hi is None or n < hi or (hi_closed and n == hi):
        return Fraction(n)
    # the interval sits inside (fl, fl + 1]; recurse on reciprocals
    ylo = 1 / (QuadValue.coerce(hi) - fl)
    if lo == fl:
        y = math.ceil(ylo) if hi_closed else math.floor(ylo) + 1
        return fl + Fraction(1, y)
    yhi = 1 / (QuadValue.coerce(lo) - fl)
    y = simplest_rational(_unwrap(ylo), _unwrap(yhi), hi_closed, lo_closed)
    return fl + 1 / y


def _unwrap(x):
    if isinstance(x, QuadValue) and x.is_rational:
        return x.rational_part
    return x


_RAT = r"[+-]?\d+(?:/\d+)?"
_RAT_RE = re.compile(rf"^\s*({_RAT})\s*$")
_QUAD_RE = re.compile(
    rf"^\s*(?:({_RAT})\s*([+-])\s*)?(\d+(?:/\d+)?)\s*\*\s*sqrt\(\s*(\d+)\s*\)\s*$"
)


def parse_rational(text: str) -> Fraction:
    m = _RAT_RE.match(text)
    if not m:
        raise ParseError(f"not a rational: {text!r}")
    try:
        return Fraction(m.group(1))
    except ZeroDivisionError:
        raise ParseError(f"zero denominator: {text!r}") from None


def parse_quad(text: str) -> QuadValue:
    if _RAT_RE.match(text):
        return QuadValue.coerce(parse_rational(text))
    m = _QUAD_RE.match(text)
    if not m:
        raise ParseError(f"not a quadratic value: {text!r}")
    a = Fraction(m.group(1)) if m.group(1) else Fraction(0)
    try:
        b = Fraction(m.group(3))
    except ZeroDivisionError:
        raise ParseError(f"zero denominator: {text!r}") from None
    if m.group(2) == "-":
        b = -b
    return QuadValue(a, b, int(m.group(4)))


def format_rational(x) -> str:
    return str(as_fraction(x))


def format_quad(x) -> str:
    x = QuadValue.coerce(x)
    if x.radicand == 1:
        return str(x.rational_part)
    b = x.radical_part
    op = "+" if b > 0 else "-"
    return f"{x.rational_part}{op}{abs(b)}*sqrt({x.radicand})"
