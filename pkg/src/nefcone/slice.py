"""Planar slices of the cones at level (alpha . h0) = 1, written as CSV and SVG.

The slice is parametrized by (u, v) as

    alpha = h0 / (h0.h0) + u (e1 - e2) / 2 + v delta = (1 + u/2, 1 - u/2, v).

Output is a pure function of the flags: rationals are printed exactly and
SVG coordinates with a fixed number of decimals.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

from .cone import Status, nef_membership, psef_membership
from .errors import DomainError
from .lattice import Divisor, Lattice
from .scalar import format_rational

__all__ = ["SliceSample", "null_conic_points", "render_svg", "sample_grid", "slice_class", "write_csv"]

NEF_COLORS = {
    Status.CERTIFIED_IN: "#4c9a5b",
    Status.CERTIFIED_OUT: "#c8553d",
    Status.UNKNOWN: "#d9d9d9",
}
PSEF_PATTERNS = {
    Status.CERTIFIED_IN: "url(#psef-in)",
    Status.CERTIFIED_OUT: "url(#psef-out)",
}


@dataclass(frozen=True)
class SliceSample:
    u: Fraction
    v: Fraction
    alpha: Divisor
    nef: Status
    psef: Status


def slice_class(lat: Lattice, u, v) -> Divisor:
    u, v = Fraction(u), Fraction(v)
    return Divisor([1 + u / 2, 1 - u / 2, v] + [0] * (lat.rank - 3), lat)


def grid_values(grid_n: int, extent) -> list[Fraction]:
    extent = Fraction(extent)
    step = 2 * extent / (grid_n - 1)
    return [-extent + i * step for i in range(grid_n)]


def sample_grid(lat: Lattice, grid_n: int, extent) -> list[SliceSample]:
    """Row-major samples: v is the row index (top row is the largest v)."""
    if grid_n < 2:
        raise DomainError("grid must have at least 2 points per side")
    extent = Fraction(extent)
    if extent <= 0:
        raise DomainError("extent must be positive")
    if not lat.is_product:
        raise DomainError("slices need a product lattice (genus >= 1)")
    vals = grid_values(grid_n, extent)
    out = []
    for v in reversed(vals):
        for u in vals:
            alpha = slice_class(lat, u, v)
            out.append(
                SliceSample(
                    u, v, alpha,
                    nef_membership(lat, alpha).status,
                    psef_membership(lat, alpha).status,
                )
            )
    return out


def null_conic_points(g: int, count: int = 96) -> list[tuple[Fraction, Fraction]]:
    """Rational points (u, v) of the slice's null conic 2xy = 2g z^2.

    On the slice the conic is (u/2)^2 + g v^2 = 1, parametrized by
    u = 2(1 - g t^2)/(1 + g t^2), v = 2t/(1 + g t^2) for rational t, plus the
    point (-2, 0) at t = infinity.
    """
    end = (Fraction(-2), Fraction(0))
    pts = [end]
    half = count // 2
    for i in range(-half, half + 1):
        # increasing in i, so the points trace the ellipse in order
        t = Fraction(i, half - abs(i) + 1)
        d = 1 + g * t * t
        pts.append((2 * (1 - g * t * t) / d, 2 * t / d))
    pts.append(end)
    return pts


def write_csv(samples: list[SliceSample]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["u", "v", "x", "y", "z", "nef", "psef"])
    for s in samples:
        x, y, z = s.alpha.rational_coords()[:3]
        w.writerow([format_rational(c) for c in (s.u, s.v, x, y, z)] + [s.nef.value, s.psef.value])
    return buf.getvalue()


def _f(x) -> str:
    return f"{float(x):.4f}"


def render_svg(samples: list[SliceSample], g: int, grid_n: int, extent, size: int = 640) -> str:
    extent = Fraction(extent)
    margin = 40
    cell = Fraction(size, grid_n)

    def px(u):
        return margin + (Fraction(u) + extent) / (2 * extent) * size

    def py(v):
        return margin + (extent - Fraction(v)) / (2 * extent) * size

    total = size + 2 * margin
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" '
        f'viewBox="0 0 {total} {total}">',
        "<defs>",
        '<pattern id="psef-in" width="6" height="6" patternUnits="userSpaceOnUse">'
        '<path d="M0,6 L6,0" stroke="#1f3b73" stroke-width="0.8"/></pattern>',
        '<pattern id="psef-out" width="6" height="6" patternUnits="userSpaceOnUse">'
        '<path d="M0,0 L6,6 M0,6 L6,0" stroke="#5a1a10" stroke-width="0.8"/></pattern>',
        f'<clipPath id="frame"><rect x="{margin}" y="{margin}" width="{size}" height="{size}"/></clipPath>',
        "</defs>",
        f'<rect x="0" y="0" width="{total}" height="{total}" fill="white"/>',
    ]
    for i, s in enumerate(samples):
        row, col = divmod(i, grid_n)
        x0, y0 = margin + col * cell, margin + row * cell
        attrs = f'x="{_f(x0)}" y="{_f(y0)}" width="{_f(cell)}" height="{_f(cell)}"'
        lines.append(f'<rect {attrs} fill="{NEF_COLORS[s.nef]}"/>')
        if s.psef in PSEF_PATTERNS:
            lines.append(f'<rect {attrs} fill="{PSEF_PATTERNS[s.psef]}"/>')
    conic = " ".join(f"{_f(px(u))},{_f(py(v))}" for u, v in null_conic_points(g))
    lines.append(
        f'<polyline points="{conic}" fill="none" stroke="black" stroke-width="1.5" '
        'clip-path="url(#frame)"/>'
    )
    lines.append(
        f'<rect x="{margin}" y="{margin}" width="{size}" height="{size}" fill="none" stroke="black"/>'
    )
    lines.append(
        f'<text x="{margin}" y="{margin - 12}" font-family="monospace" font-size="12">'
        f"genus {g}: slice (alpha.h0)=1, u along (e1-e2)/2, v along delta, extent {extent}</text>"
    )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
