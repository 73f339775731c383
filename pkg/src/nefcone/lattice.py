"""Numerical classes of divisors on a surface and their intersection form."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

from .errors import (
    DomainError,
    LatticeMismatchError,
    NonpositiveNormError,
    ParseError,
)
from .scalar import QuadValue, as_fraction, format_quad, parse_quad

__all__ = [
    "Divisor",
    "Lattice",
    "extend_with_negative_block",
    "gram_signature",
    "orthogonal_split",
    "p1_x_p1_lattice",
    "pair",
    "parse_divisor",
    "product_lattice",
    "signature",
]


class Lattice:
    """A rank ``n`` lattice with a symmetric rational Gram matrix.

    ``known_effective`` and ``known_nef`` hold coordinate tuples of classes
    that are known to be effective / nef on the modelled surface; use
    :meth:`effective_classes` and :meth:`nef_classes` to get divisors.
    """

    def __init__(
        self,
        gram: Sequence[Sequence],
        basis_labels: Sequence[str] | None = None,
        known_effective: Iterable[Sequence] = (),
        known_nef: Iterable[Sequence] = (),
        genus: int | None = None,
    ):
        rows = tuple(tuple(as_fraction(x) for x in row) for row in gram)
        n = len(rows)
        if n == 0 or any(len(row) != n for row in rows):
            raise DomainError("gram matrix must be square and nonempty")
        for i in range(n):
            for j in range(i):
                if rows[i][j] != rows[j][i]:
                    raise DomainError(f"gram matrix not symmetric at ({i}, {j})")
        self.gram = rows
        self.rank = n
        self.basis_labels = tuple(basis_labels or (f"b{i}" for i in range(n)))
        if len(self.basis_labels) != n:
            raise DomainError("one label per basis vector required")
        self.genus = genus
        self.known_effective = tuple(self._coords(c) for c in known_effective)
        self.known_nef = tuple(self._coords(c) for c in known_nef)
        for nef in self.known_nef:
            for eff in self.known_effective:
                if self._pair_rational(nef, eff) < 0:
                    raise DomainError(
                        "registered nef class pairs negatively with a registered effective class"
                    )

    def _coords(self, c) -> tuple[Fraction, ...]:
        c = tuple(as_fraction(x) for x in c)
        if len(c) != self.rank:
            raise DomainError(f"expected {self.rank} coordinates, got {len(c)}")
        return c

    def _pair_rational(self, u, v) -> Fraction:
        g = self.gram
        total = Fraction(0)
        for i, ui in enumerate(u):
            if ui:
                row = g[i]
                total += ui * sum(row[j] * vj for j, vj in enumerate(v) if vj)
        return total

    def __eq__(self, other):
        if not isinstance(other, Lattice):
            return NotImplemented
        return (
            self.gram == other.gram
            and self.basis_labels == other.basis_labels
            and self.genus == other.genus
        )

    def __hash__(self):
        return hash((self.gram, self.basis_labels, self.genus))

    def __repr__(self):
        return f"Lattice(rank={self.rank}, genus={self.genus}, labels={self.basis_labels})"

    @property
    def is_product(self) -> bool:
        """True for C x C models: basis starts with (e1, e2, delta)."""
        return (
            self.genus is not None
            and self.genus >= 1
            and self.basis_labels[:3] == ("e1", "e2", "delta")
        )

    def divisor(self, coords) -> "Divisor":
        return Divisor(coords, self)

    def basis_vector(self, i: int) -> "Divisor":
        return Divisor([1 if j == i else 0 for j in range(self.rank)], self)

    def zero(self) -> "Divisor":
        return Divisor([0] * self.rank, self)

    def effective_classes(self) -> list["Divisor"]:
        return [Divisor(c, self) for c in self.known_effective]

    def nef_classes(self) -> list["Divisor"]:
        return [Divisor(c, self) for c in self.known_nef]

    def __getitem__(self, label: str) -> "Divisor":
        return self.basis_vector(self.basis_labels.index(label))


class Divisor:
    """A numerical class: coordinates in the lattice basis, exact."""

    __slots__ = ("coords", "lattice")

    def __init__(self, coords, lattice: Lattice):
        coords = tuple(QuadValue.coerce(c) for c in coords)
        if len(coords) != lattice.rank:
            raise DomainError(f"expected {lattice.rank} coordinates, got {len(coords)}")
        fields = {c.radicand for c in coords if c.radicand > 1}
        if len(fields) > 1:
            raise DomainError(f"coordinates mix radicands {sorted(fields)}")
        self.coords = coords
        self.lattice = lattice

    @property
    def is_rational(self) -> bool:
        return all(c.is_rational for c in self.coords)

    def rational_coords(self) -> tuple[Fraction, ...]:
        return tuple(c.to_fraction() for c in self.coords)

    def is_zero(self) -> bool:
        return not any(self.coords)

    def _check(self, other: "Divisor"):
        if not isinstance(other, Divisor):
            raise TypeError(f"expected a Divisor, got {type(other).__name__}")
        if other.lattice is not self.lattice and other.lattice != self.lattice:
            raise LatticeMismatchError("divisors live in different lattices")

    def __add__(self, other):
        if not isinstance(other, Divisor):
            return NotImplemented
        self._check(other)
        return Divisor([a + b for a, b in zip(self.coords, other.coords)], self.lattice)

    def __sub__(self, other):
        if not isinstance(other, Divisor):
            return NotImplemented
        self._check(other)
        return Divisor([a - b for a, b in zip(self.coords, other.coords)], self.lattice)

    def __neg__(self):
        return Divisor([-a for a in self.coords], self.lattice)

    def __mul__(self, scalar):
        if isinstance(scalar, Divisor):
            return NotImplemented
        scalar = QuadValue.coerce(scalar)
        return Divisor([scalar * a for a in self.coords], self.lattice)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        inv = 1 / QuadValue.coerce(scalar)
        return self * inv

    def __eq__(self, other):
        if not isinstance(other, Divisor):
            return NotImplemented
        return self.lattice == other.lattice and self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def __repr__(self):
        return f"Divisor({format_divisor(self)})"

    def __str__(self):
        return format_divisor(self)

    def to_text(self) -> str:
        return format_divisor(self)


def format_divisor(d: Divisor) -> str:
    return ",".join(format_quad(c) for c in d.coords)


def parse_divisor(text: str, lattice: Lattice) -> Divisor:
    parts = [p for p in text.split(",")]
    if len(parts) != lattice.rank:
        raise ParseError(
            f"class {text!r} has {len(parts)} coordinates, lattice rank is {lattice.rank}"
        )
    return Divisor([parse_quad(p) for p in parts], lattice)


def pair(a: Divisor, b: Divisor) -> QuadValue:
    """Intersection number ``a^T G b``."""
    a._check(b)
    if a.is_rational and b.is_rational:
        return QuadValue.coerce(
            a.lattice._pair_rational(a.rational_coords(), b.rational_coords())
        )
    g = a.lattice.gram
    total = QuadValue()
    for i, ai in enumerate(a.coords):
        if not ai:
            continue
        row = g[i]
        acc = QuadValue()
        for j, bj in enumerate(b.coords):
            if bj and row[j]:
                acc = acc + bj * row[j]
        total = total + ai * acc
    return total


def product_lattice(g: int) -> Lattice:
    """N^1(C x C) restricted to the span of e1, e2 and delta = Diagonal - e1 - e2."""
    if not isinstance(g, int) or isinstance(g, bool):
        raise DomainError(f"genus must be an integer, got {g!r}")
    if g < 1:
        raise DomainError(
            f"product_lattice needs genus >= 1 (got {g}); use p1_x_p1_lattice for genus 0"
        )
    return Lattice(
        [[0, 1, 0], [1, 0, 0], [0, 0, -2 * g]],
        basis_labels=("e1", "e2", "delta"),
        known_effective=[(1, 0, 0), (0, 1, 0), (1, 1, 1)],
        known_nef=[(1, 0, 0), (0, 1, 0)],
        genus=g,
    )


def p1_x_p1_lattice() -> Lattice:
    return Lattice(
        [[0, 1], [1, 0]],
        basis_labels=("e1", "e2"),
        known_effective=[(1, 0), (0, 1)],
        known_nef=[(1, 0), (0, 1)],
        genus=0,
    )


def extend_with_negative_block(base: Lattice, diag: Sequence) -> Lattice:
    """Append an orthogonal negative definite diagonal block (extra Picard rank)."""
    diag = [as_fraction(x) for x in diag]
    for x in diag:
        if x >= 0:
            raise DomainError(f"extra block entries must be negative, got {x}")
    if not diag:
        return base
    n, k = base.rank, len(diag)
    gram = [list(row) + [Fraction(0)] * k for row in base.gram]
    for i, x in enumerate(diag):
        gram.append([Fraction(0)] * (n + i) + [x] + [Fraction(0)] * (k - i - 1))
    used = set(base.basis_labels)
    labels = list(base.basis_labels)
    i = 1
    while len(labels) < n + k:
        name = f"x{i}"
        if name not in used:
            labels.append(name)
        i += 1
    pad = (Fraction(0),) * k
    return Lattice(
        gram,
        basis_labels=labels,
        known_effective=[c + pad for c in base.known_effective],
        known_nef=[c + pad for c in base.known_nef],
        genus=base.genus,
    )


def _congruence_diagonal(gram) -> list[Fraction]:
    """Diagonal of a matrix congruent to ``gram`` (symmetric elimination)."""
    m = [[as_fraction(x) for x in row] for row in gram]
    n = len(m)
    diag = []
    for k in range(n):
        piv = next((i for i in range(k, n) if m[i][i] != 0), None)
        if piv is None:
            pos = next(
                ((i, j) for i in range(k, n) for j in range(i + 1, n) if m[i][j] != 0),
                None,
            )
            if pos is None:
                diag.extend([Fraction(0)] * (n - k))
                break
            i, j = pos
            # x_i -> x_i + x_j makes the (i, i) entry 2 m[i][j] != 0
            for c in range(n):
                m[i][c] += m[j][c]
            for r in range(n):
                m[r][i] += m[r][j]
            piv = i
        if piv != k:
            m[k], m[piv] = m[piv], m[k]
            for row in m:
                row[k], row[piv] = row[piv], row[k]
        p = m[k][k]
        for r in range(k + 1, n):
            f = m[r][k] / p
            if f:
                for c in range(k, n):
                    m[r][c] -= f * m[k][c]
                for rr in range(k, n):
                    m[rr][r] -= f * m[rr][k]
        diag.append(p)
    return diag


def gram_signature(gram) -> tuple[int, int, int]:
    diag = _congruence_diagonal(gram)
    return (
        sum(1 for x in diag if x > 0),
        sum(1 for x in diag if x < 0),
        sum(1 for x in diag if x == 0),
    )


def signature(lat) -> tuple[int, int, int]:
    """Inertia ``(n_plus, n_minus, n_zero)`` of the intersection form."""
    if isinstance(lat, Lattice):
        return gram_signature(lat.gram)
    return gram_signature(lat)


def _primitive(v: Divisor) -> Divisor:
    if not v.is_rational:
        return v
    coords = v.rational_coords()
    den = reduce(math.lcm, (c.denominator for c in coords), 1)
    ints = [int(c * den) for c in coords]
    g = reduce(math.gcd, ints, 0)
    if g == 0:
        return v
    return Divisor([Fraction(x, g) for x in ints], v.lattice)


def orthogonal_split(lat: Lattice, h: Divisor) -> tuple[QuadValue, list[Divisor]]:
    """Return ``(h.h, basis of the orthogonal complement of h)``.

    The complement basis is pairwise orthogonal with negative norms and is
    not normalized; rational vectors are scaled to primitive integral ones.
    """
    if h.lattice != lat:
        raise LatticeMismatchError("h does not belong to this lattice")
    hh = pair(h, h)
    if hh.sign() <= 0:
        raise NonpositiveNormError(f"(h.h) = {hh} is not positive")
    basis: list[Divisor] = []
    norms: list[QuadValue] = []
    for i in range(lat.rank):
        v = lat.basis_vector(i)
        v = v - h * (pair(v, h) / hh)
        for w, nw in zip(basis, norms):
            c = pair(v, w)
            if c:
                v = v - w * (c / nw)
        if v.is_zero():
            continue
        nv = pair(v, v)
        if nv.sign() >= 0:
            raise DomainError(
                "orthogonal complement of h is not negative definite; "
                "lattice signature is not (1, rank-1)"
            )
        v = _primitive(v)
        basis.append(v)
        norms.append(pair(v, v))
    return hh, basis
