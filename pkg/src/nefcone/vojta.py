"""Vojta's nef classes on C x C and separators built from them.

For genus ``g >= 2`` and ``r, s > 0`` the class

    Y(r, s) = a1*e1 + a2*e2 + sign*delta,   a1 = sqrt((g+s)/r),  a2 = r*a1

is nef once ``r > (g+s)(g-1)/s``. A separator is such a certified-nef class
pairing strictly negatively with a target, which proves the target is not
pseudoeffective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .errors import DomainError, NotProductLatticeError
from .lattice import Divisor, Lattice, pair
from .scalar import QuadValue, as_fraction, format_quad, format_rational, sqrt_upper

__all__ = [
    "SearchBudget",
    "Separator",
    "VojtaParams",
    "curve_constraint",
    "discriminant_quarter",
    "find_separator",
    "is_nef_certified",
    "nef_threshold",
    "vojta_class",
]


def _check_genus(g) -> int:
    if not isinstance(g, int) or isinstance(g, bool) or g < 2:
        raise DomainError(f"genus must be an integer >= 2, got {g!r}")
    return g


def _positive(name, x) -> Fraction:
    x = as_fraction(x)
    if x <= 0:
        raise DomainError(f"{name} must be positive, got {x}")
    return x


@dataclass(frozen=True)
class VojtaParams:
    g: int
    r: Fraction
    s: Fraction
    sign: int = 1

    def __post_init__(self):
        _check_genus(self.g)
        object.__setattr__(self, "r", _positive("r", self.r))
        object.__setattr__(self, "s", _positive("s", self.s))
        if self.sign not in (1, -1):
            raise DomainError(f"sign must be +1 or -1, got {self.sign!r}")

    @property
    def threshold(self) -> Fraction:
        return nef_threshold(self.g, self.s)

    @property
    def nef_margin(self) -> Fraction:
        return self.r - self.threshold

    def coefficients(self) -> tuple[QuadValue, QuadValue, int]:
        a1 = QuadValue.sqrt((self.g + self.s) / self.r)
        return a1, a1 * self.r, self.sign


def nef_threshold(g: int, s) -> Fraction:
    """(g+s)(g-1)/s; Y(r, s) is nef for every r strictly above it."""
    g = _check_genus(g)
    s = _positive("s", s)
    return (g + s) * (g - 1) / s


def is_nef_certified(p: VojtaParams) -> bool:
    """One-sided: False means "not certified", not "not nef"."""
    return p.r > nef_threshold(p.g, p.s)


def vojta_class(p: VojtaParams, lat: Lattice) -> Divisor:
    if not lat.is_product or lat.genus != p.g:
        raise NotProductLatticeError(
            f"Y(r,s) for genus {p.g} needs a product lattice of that genus"
        )
    a1, a2, a3 = p.coefficients()
    return Divisor([a1, a2, a3] + [0] * (lat.rank - 3), lat)


def discriminant_quarter(g: int, s, r) -> Fraction:
    """Quarter discriminant of the binary form in (b1, b2)

        b2^2 (g+s)/r + 2 b1 b2 (s-g) + b1^2 ((g+s) r - 4g(g-1)).

    It is negative exactly when r exceeds the nef threshold.
    """
    g = _check_genus(g)
    s = _positive("s", s)
    r = _positive("r", r)
    return (s - g) ** 2 - (g + s) / r * ((g + s) * r - 4 * g * (g - 1))


def curve_constraint(g: int, b0: int, b1: int, b2: int) -> bool:
    """Necessary condition 2 b1 b2 + (2g-2) b1^2 >= 2g b0^2 on an irreducible
    non-fibre curve numerically b0*delta + b1*e1 + b2*e2 + (orthogonal part)."""
    g = _check_genus(g)
    for name, v in (("b0", b0), ("b1", b1), ("b2", b2)):
        if not isinstance(v, int) or isinstance(v, bool):
            raise DomainError(f"{name} must be an integer, got {v!r}")
    if b1 < 0 or b2 < 0:
        raise DomainError("b1 and b2 must be nonnegative")
    return 2 * b1 * b2 + (2 * g - 2) * b1 * b1 >= 2 * g * b0 * b0


@dataclass(frozen=True)
class Separator:
    params: VojtaParams
    target: Divisor
    pairing: QuadValue

    @property
    def threshold(self) -> Fraction:
        return self.params.threshold

    @property
    def nef_margin(self) -> Fraction:
        return self.params.nef_margin

    def vojta(self) -> Divisor:
        return vojta_class(self.params, self.target.lattice)

    def verify(self) -> bool:
        """Recompute both certificate conditions from scratch."""
        if not is_nef_certified(self.params):
            return False
        value = pair(self.vojta(), self.target)
        return value == self.pairing and value.sign() < 0

    def to_dict(self) -> dict:
        p = self.params
        return {
            "g": p.g,
            "r": format_rational(p.r),
            "s": format_rational(p.s),
            "sign": "+" if p.sign > 0 else "-",
            "threshold": format_rational(self.threshold),
            "nef_margin": format_rational(self.nef_margin),
            "target": self.target.to_text(),
            "pairing": format_quad(self.pairing),
        }


@dataclass(frozen=True)
class SearchBudget:
    """Limits for the general separator search.

    ``s`` runs over 1, 2, 1/2, 4, 1/4, ... up to ``2**max_s_exponent``;
    ``max_refinements`` bounds the doubling loops that pick r for each s.
    """

    max_s_exponent: int = 8
    max_refinements: int = 64

    def s_grid(self) -> Iterator[Fraction]:
        yield Fraction(1)
        for j in range(1, self.max_s_exponent + 1):
            yield Fraction(2**j)
            yield Fraction(1, 2**j)


def _closed_form_k(g: int, q: Fraction) -> int:
    # least k with k^2 > g - 1 (nefness of r = (g+1) k^2) and 1/k < 2|q|g
    k_nef = math.isqrt(g - 1) + 1
    k_neg = math.floor(1 / (2 * abs(q) * g)) + 1
    return max(k_nef, k_neg)


def _pick_w(g: int, s: Fraction, x: Fraction, y: Fraction, z: Fraction, budget: SearchBudget):
    """Rational w > 0 with w^2 > (g-1)/s and

        y/w + (g+s) x w - 2g|z| < 0,

    or None. With r = (g+s) w^2 the Vojta class has a1 = 1/w, a2 = (g+s) w.
    """
    c = Fraction(g - 1) / s
    A = (g + s) * x
    B = 2 * g * abs(z)

    def ok(w):
        return w > 0 and w * w > c and A * w * w - B * w + y < 0

    if A > 0:
        w_m = B / (2 * A)
        if B * B <= 4 * A * y:
            return None
        if w_m * w_m > c:
            return w_m
        # q(w) increases beyond w_m, so only w just above sqrt(c) can work
        rhs = A * c + y
        if rhs >= 0 and B * B * c <= rhs * rhs:
            return None
        for bits in range(8, 8 + 4 * budget.max_refinements, 4):
            w = sqrt_upper(c, bits)
            if ok(w):
                return w
        return None
    if A == 0:
        if B == 0 and y >= 0:
            return None
        lower = sqrt_upper(c, 8)
        if B > 0:
            lower = max(lower, y / B)
        w = Fraction(math.floor(lower) + 1)
        return w if ok(w) else None
    w = Fraction(max(1, math.floor(sqrt_upper(c, 8)) + 1))
    for _ in range(budget.max_refinements):
        if ok(w):
            return w
        w *= 2
    return None


def find_separator(lat: Lattice, target: Divisor, budget: SearchBudget | None = None):
    """Find a certified-nef Vojta class pairing strictly negatively with ``target``.

    Returns a :class:`Separator`, or None when the budget is exhausted; None
    makes no claim about pseudoeffectivity.
    """
    if not lat.is_product:
        raise NotProductLatticeError("find_separator needs a product lattice")
    if lat.genus < 2:
        raise DomainError(
            f"genus {lat.genus}: Vojta separators need genus >= 2"
        )
    if target.lattice != lat:
        raise DomainError("target does not belong to this lattice")
    budget = budget or SearchBudget()
    g = lat.genus
    coords = target.rational_coords()
    x, y, z = coords[:3]
    extra = coords[3:]

    if x == 0 and y == 1 and z != 0 and not any(extra):
        k = _closed_form_k(g, z)
        params = VojtaParams(g, Fraction((g + 1) * k * k), Fraction(1), 1 if z > 0 else -1)
        return _make(params, target)

    sign = -1 if z < 0 else 1
    for s in budget.s_grid():
        w = _pick_w(g, s, x, y, z, budget)
        if w is None:
            continue
        params = VojtaParams(g, (g + s) * w * w, s, sign)
        sep = _make(params, target)
        if sep is not None:
            return sep
    return None


def _make(params: VojtaParams, target: Divisor):
    if not is_nef_certified(params):
        return None
    value = pair(vojta_class(params, target.lattice), target)
    if value.sign() >= 0:
        return None
    return Separator(params, target, value)
