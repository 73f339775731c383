"""Certificate-producing membership oracles for the nef and pseudoeffective
cones, and the non-polyhedrality criterion engine.

Verdicts are three-valued. ``CERTIFIED_IN`` and ``CERTIFIED_OUT`` always
carry a certificate whose ``verify`` recomputes everything through
:func:`~nefcone.lattice.pair`; ``UNKNOWN`` is an honest outcome, not a "no".
"""

from __future__ import annotations

import enum
import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import DomainError, LatticeMismatchError, NonpositiveNormError, PreconditionViolated
from .lattice import Divisor, Lattice, pair
from .scalar import QuadValue, as_fraction, format_quad, format_rational, simplest_rational, sqrt_upper
from .vojta import (
    Separator,
    VojtaParams,
    find_separator,
    is_nef_certified,
    vojta_class,
)

__all__ = [
    "BignessWitness",
    "CriterionReport",
    "EffectiveCombination",
    "LineCondition",
    "NefDecomposition",
    "NefWitness",
    "PairingWitness",
    "RoundConeWitness",
    "Status",
    "Verdict",
    "check_criterion",
    "nef_membership",
    "positivity_onset",
    "psef_membership",
    "pt_bracket",
    "pt_class",
    "pt_self_intersection_factored",
    "reference_ample",
]


class Status(str, enum.Enum):
    CERTIFIED_IN = "CERTIFIED_IN"
    CERTIFIED_OUT = "CERTIFIED_OUT"
    UNKNOWN = "UNKNOWN"

    def __str__(self):
        return self.value


# -- certificates -----------------------------------------------------------


@dataclass(frozen=True)
class EffectiveCombination:
    """alpha = sum of nonnegative multiples of registered effective classes."""

    terms: tuple[tuple[Divisor, Fraction], ...]

    def verify(self, alpha: Divisor) -> bool:
        registered = set(alpha.lattice.effective_classes())
        total = alpha.lattice.zero()
        for cls, w in self.terms:
            if w < 0 or cls not in registered:
                return False
            total = total + cls * w
        return total == alpha

    def to_dict(self):
        return {
            "kind": "effective_combination",
            "terms": [{"class": c.to_text(), "weight": format_rational(w)} for c, w in self.terms],
        }


@dataclass(frozen=True)
class BignessWitness:
    """alpha^2 > 0 and alpha.h > 0 for an ample h, so alpha is big."""

    ample: Divisor

    def verify(self, alpha: Divisor) -> bool:
        return pair(alpha, alpha).sign() > 0 and pair(alpha, self.ample).sign() > 0

    def to_dict(self):
        return {"kind": "bigness", "ample": self.ample.to_text()}


@dataclass(frozen=True)
class NefWitness:
    """A registered nef class pairing strictly negatively with alpha."""

    nef_class: Divisor
    pairing: QuadValue

    def verify(self, alpha: Divisor) -> bool:
        value = pair(self.nef_class, alpha)
        return (
            self.nef_class in alpha.lattice.nef_classes()
            and value == self.pairing
            and value.sign() < 0
        )

    def to_dict(self):
        return {
            "kind": "nef_witness",
            "nef_class": self.nef_class.to_text(),
            "pairing": format_quad(self.pairing),
        }


@dataclass(frozen=True)
class PairingWitness:
    """alpha pairs negatively with a registered effective class, or with itself."""

    other: Optional[Divisor]
    pairing: QuadValue

    def verify(self, alpha: Divisor) -> bool:
        if self.other is None:
            value = pair(alpha, alpha)
        else:
            if self.other not in alpha.lattice.effective_classes():
                return False
            value = pair(alpha, self.other)
        return value == self.pairing and value.sign() < 0

    def to_dict(self):
        return {
            "kind": "self_intersection" if self.other is None else "effective_pairing",
            "other": None if self.other is None else self.other.to_text(),
            "pairing": format_quad(self.pairing),
        }


@dataclass(frozen=True)
class NefDecomposition:
    """alpha = scale * Y(r, s) + mu1 * e1 + mu2 * e2, all weights >= 0.

    ``params`` is None when ``scale`` is zero.
    """

    params: Optional[VojtaParams]
    scale: Fraction
    mu1: Fraction
    mu2: Fraction

    def verify(self, alpha: Divisor) -> bool:
        lat = alpha.lattice
        if min(self.scale, self.mu1, self.mu2) < 0:
            return False
        total = lat["e1"] * self.mu1 + lat["e2"] * self.mu2
        if self.scale:
            if self.params is None or not is_nef_certified(self.params):
                return False
            total = total + vojta_class(self.params, lat) * self.scale
        return total == alpha

    def to_dict(self):
        out = {
            "kind": "nef_decomposition",
            "scale": format_rational(self.scale),
            "mu1": format_rational(self.mu1),
            "mu2": format_rational(self.mu2),
            "vojta": None,
        }
        if self.params is not None:
            p = self.params
            out["vojta"] = {
                "g": p.g,
                "r": format_rational(p.r),
                "s": format_rational(p.s),
                "sign": "+" if p.sign > 0 else "-",
                "threshold": format_rational(p.threshold),
            }
        return out


@dataclass(frozen=True)
class RoundConeWitness:
    """Genus 1: alpha^2 >= 0 and alpha.h >= 0 describe the nef cone exactly."""

    ample: Divisor

    def verify(self, alpha: Divisor) -> bool:
        return (
            alpha.lattice.genus == 1
            and pair(alpha, alpha).sign() >= 0
            and pair(alpha, self.ample).sign() >= 0
        )

    def to_dict(self):
        return {"kind": "round_cone", "ample": self.ample.to_text()}


def _separator_verify(sep: Separator, alpha: Divisor) -> bool:
    return sep.target == alpha and sep.verify()


@dataclass(frozen=True)
class Verdict:
    cone: str
    alpha: Divisor
    status: Status
    certificate: object = None

    def verify(self) -> bool:
        """Re-check the certificate; UNKNOWN verdicts trivially pass."""
        if self.status is Status.UNKNOWN:
            return self.certificate is None
        cert = self.certificate
        if cert is None:
            return False
        if isinstance(cert, Separator):
            return self.status is Status.CERTIFIED_OUT and _separator_verify(cert, self.alpha)
        allowed = {
            ("nef", Status.CERTIFIED_IN): (NefDecomposition, RoundConeWitness),
            ("nef", Status.CERTIFIED_OUT): (PairingWitness,),
            ("psef", Status.CERTIFIED_IN): (EffectiveCombination, BignessWitness),
            ("psef", Status.CERTIFIED_OUT): (NefWitness,),
        }[(self.cone, self.status)]
        return isinstance(cert, allowed) and cert.verify(self.alpha)

    def to_dict(self):
        cert = self.certificate
        if isinstance(cert, Separator):
            cert_dict = {"kind": "separator", **cert.to_dict()}
        else:
            cert_dict = None if cert is None else cert.to_dict()
        return {
            "cone": self.cone,
            "class": self.alpha.to_text(),
            "status": self.status.value,
            "certificate": cert_dict,
        }


# -- helpers ----------------------------------------------------------------


def reference_ample(lat: Lattice) -> Divisor:
    """h0 = (e1 + e2) / 2, padded with zeros."""
    if lat.basis_labels[:2] != ("e1", "e2"):
        raise DomainError("reference_ample needs a lattice whose basis starts with e1, e2")
    half = Fraction(1, 2)
    return Divisor([half, half] + [0] * (lat.rank - 2), lat)


def _rational(alpha: Divisor, lat: Lattice) -> tuple[Fraction, ...]:
    if alpha.lattice != lat:
        raise LatticeMismatchError("class does not belong to this lattice")
    if not alpha.is_rational:
        raise DomainError("membership oracles need rational coordinates")
    return alpha.rational_coords()


def _solve_exact(columns: Sequence[Sequence[Fraction]], target: Sequence[Fraction]):
    """Unique solution of sum_j w_j columns[j] = target, or None."""
    k, n = len(columns), len(target)
    rows = [[columns[j][i] for j in range(k)] + [target[i]] for i in range(n)]
    piv_cols = []
    r = 0
    for c in range(k):
        p = next((i for i in range(r, n) if rows[i][c] != 0), None)
        if p is None:
            return None
        rows[r], rows[p] = rows[p], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(n):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        piv_cols.append(c)
        r += 1
    if any(rows[i][k] != 0 for i in range(r, n)):
        return None
    return [rows[i][k] for i in range(k)]


def _effective_combination(lat: Lattice, coords) -> Optional[EffectiveCombination]:
    gens = lat.known_effective
    if not any(coords):
        return EffectiveCombination(())
    if _independent(gens):
        # the representation is unique, so one solve decides membership
        subsets = [tuple(range(len(gens)))]
    else:
        # Caratheodory: a conic combination uses linearly independent generators
        subsets = (
            subset
            for size in range(1, min(len(gens), lat.rank) + 1)
            for subset in itertools.combinations(range(len(gens)), size)
        )
    for subset in subsets:
        w = _solve_exact([gens[i] for i in subset], coords)
        if w is not None and all(x >= 0 for x in w):
            return EffectiveCombination(
                tuple((Divisor(gens[i], lat), x) for i, x in zip(subset, w) if x)
            )
    return None


@functools.lru_cache(maxsize=64)
def _independent(gens: tuple) -> bool:
    if not gens:
        return False
    n = len(gens[0])
    return len(gens) <= n and _solve_exact(gens, [Fraction(0)] * n) == [0] * len(gens)


# -- membership oracles -----------------------------------------------------


def psef_membership(lat: Lattice, alpha: Divisor) -> Verdict:
    coords = _rational(alpha, lat)

    combo = _effective_combination(lat, coords)
    if combo is not None:
        return Verdict("psef", alpha, Status.CERTIFIED_IN, combo)
    if lat.basis_labels[:2] == ("e1", "e2"):
        h0 = reference_ample(lat)
        if pair(alpha, alpha).sign() > 0 and pair(alpha, h0).sign() > 0:
            return Verdict("psef", alpha, Status.CERTIFIED_IN, BignessWitness(h0))

    for nef in lat.nef_classes():
        value = pair(nef, alpha)
        if value.sign() < 0:
            return Verdict("psef", alpha, Status.CERTIFIED_OUT, NefWitness(nef, value))
    if lat.is_product and lat.genus >= 2:
        sep = find_separator(lat, alpha)
        if sep is not None:
            return Verdict("psef", alpha, Status.CERTIFIED_OUT, sep)
    return Verdict("psef", alpha, Status.UNKNOWN)


def _vojta_decomposition(g: int, x: Fraction, y: Fraction, z: Fraction):
    """Write (x, y, z) as |z| Y(r,s) + mu1 e1 + mu2 e2 with Y certified nef.

    With r = (g+s) w^2 the class Y(r,s) is (1/w, (g+s) w, sign). Feasible s
    satisfy s <= xy/z^2 - g and phi(s) = y^2 s - z^2 (g-1)(g+s)^2 > 0; phi is
    concave, so its maximum over (0, xy/z^2 - g] decides feasibility exactly.
    """
    lam = abs(z)
    if x <= 0 or y <= 0:
        return None
    s_max = x * y / (z * z) - g
    if s_max <= 0:
        return None

    def phi(s):
        return y * y * s - z * z * (g - 1) * (g + s) ** 2

    if s_max >= 1 and phi(Fraction(1)) > 0:
        s = Fraction(1)
    else:
        s_star = y * y / (2 * z * z * (g - 1)) - g
        if s_star <= 0:
            return None
        s = min(s_star, s_max)
        if phi(s) <= 0:
            return None

    c = Fraction(g - 1) / s
    lo = lam / x
    hi = y / (lam * (g + s))
    if lo * lo > c:
        w = simplest_rational(lo, hi, True, True)
    else:
        bits = 8
        u = sqrt_upper(c, bits)
        while u > hi:
            bits *= 2
            u = sqrt_upper(c, bits)
        w = simplest_rational(u, hi, True, True)
    params = VojtaParams(g, (g + s) * w * w, s, 1 if z > 0 else -1)
    return NefDecomposition(params, lam, x - lam / w, y - lam * (g + s) * w)


def nef_membership(lat: Lattice, alpha: Divisor) -> Verdict:
    coords = _rational(alpha, lat)

    for eff in lat.effective_classes():
        value = pair(alpha, eff)
        if value.sign() < 0:
            return Verdict("nef", alpha, Status.CERTIFIED_OUT, PairingWitness(eff, value))
    self_int = pair(alpha, alpha)
    if self_int.sign() < 0:
        return Verdict("nef", alpha, Status.CERTIFIED_OUT, PairingWitness(None, self_int))

    g = lat.genus
    if g == 0 and lat.rank == 2 and lat.basis_labels == ("e1", "e2"):
        x, y = coords
        if x >= 0 and y >= 0:
            return Verdict("nef", alpha, Status.CERTIFIED_IN, NefDecomposition(None, Fraction(0), x, y))
        return Verdict("nef", alpha, Status.UNKNOWN)
    if not lat.is_product:
        return Verdict("nef", alpha, Status.UNKNOWN)
    if g == 1:
        h0 = reference_ample(lat)
        if pair(alpha, h0).sign() >= 0:
            return Verdict("nef", alpha, Status.CERTIFIED_IN, RoundConeWitness(h0))
        return Verdict("nef", alpha, Status.UNKNOWN)

    x, y, z = coords[:3]
    if any(coords[3:]):
        return Verdict("nef", alpha, Status.UNKNOWN)
    if z == 0:
        if x >= 0 and y >= 0:
            return Verdict("nef", alpha, Status.CERTIFIED_IN, NefDecomposition(None, Fraction(0), x, y))
        return Verdict("nef", alpha, Status.UNKNOWN)
    dec = _vojta_decomposition(g, x, y, z)
    if dec is not None:
        return Verdict("nef", alpha, Status.CERTIFIED_IN, dec)
    return Verdict("nef", alpha, Status.UNKNOWN)


# -- the segment P_t --------------------------------------------------------


def _same_lattice(*divs: Divisor):
    first = divs[0]
    for d in divs[1:]:
        first._check(d)


def pt_class(e: Divisor, h: Divisor, f: Divisor, m, t) -> Divisor:
    """P_t = t e + (1 - t)(h' + m f) with h' = (e.h) h."""
    _same_lattice(e, h, f)
    m, t = QuadValue.coerce(m), QuadValue.coerce(t)
    h_prime = h * pair(e, h)
    return e * t + (h_prime + f * m) * (1 - t)


def _check_orthogonality(e, h, f):
    _same_lattice(e, h, f)
    for name, value in (
        ("(e.e)", pair(e, e)),
        ("(e.f)", pair(e, f)),
        ("(h.f)", pair(h, f)),
    ):
        if value:
            raise PreconditionViolated(f"{name} = {value}, expected 0")


def pt_bracket(e: Divisor, h: Divisor, f: Divisor, m, t) -> QuadValue:
    """(1-t)(h'.h') + (1-t) m^2 (f.f) + 2t (e.h')."""
    m, t = QuadValue.coerce(m), QuadValue.coerce(t)
    h_prime = h * pair(e, h)
    return (1 - t) * pair(h_prime, h_prime) + (1 - t) * m * m * pair(f, f) + 2 * t * pair(e, h_prime)


def pt_self_intersection_factored(e: Divisor, h: Divisor, f: Divisor, m, t) -> QuadValue:
    _check_orthogonality(e, h, f)
    t = QuadValue.coerce(t)
    return (1 - t) * pt_bracket(e, h, f, m, t)


def _unwrap(x: QuadValue):
    return x.rational_part if x.is_rational else x


def positivity_onset(e: Divisor, h: Divisor, f: Divisor, m):
    """Least t0 in [0, 1) with the bracket positive on (t0, 1].

    The bracket is affine in t: A + t (2B - A) with A = h'^2 + m^2 f^2 and
    B = (e.h') > 0.
    """
    _check_orthogonality(e, h, f)
    if pair(e, h).sign() <= 0:
        raise PreconditionViolated("(e.h) must be positive")
    m = QuadValue.coerce(m)
    h_prime = h * pair(e, h)
    A = pair(h_prime, h_prime) + m * m * pair(f, f)
    B = pair(e, h_prime)
    if A.sign() >= 0:
        return Fraction(0)
    return _unwrap(A / (A - 2 * B))


# -- criterion engine -------------------------------------------------------

DEFAULT_LINE_SAMPLES = tuple(
    sgn * Fraction(10) ** -k for k in (-1, 0, 1, 2, 6) for sgn in (1, -1)
)


@dataclass(frozen=True)
class LineCondition:
    """Evidence that the line e + R f meets the psef cone only in e.

    ``kind`` is ANALYTIC (every nonzero multiple is covered by the closed-form
    separator), SAMPLED (each tested multiple was certified outside), or
    FAILED (``witness`` is the first multiple that could not be excluded).
    """

    kind: str
    tested: tuple[Fraction, ...] = ()
    separators: tuple[Separator, ...] = ()
    witness: Optional[Fraction] = None
    witness_verdict: Optional[Verdict] = None

    def to_dict(self):
        return {
            "kind": self.kind,
            "tested": [format_rational(s) for s in self.tested],
            "separators": [s.to_dict() for s in self.separators],
            "witness": None if self.witness is None else format_rational(self.witness),
            "witness_verdict": None if self.witness_verdict is None else self.witness_verdict.to_dict(),
        }


@dataclass(frozen=True)
class CriterionReport:
    h: Divisor
    e: Divisor
    f: Divisor
    hypothesis_e_nonzero: bool
    hypothesis_e_null: bool
    hypothesis_e_boundary: bool
    hypothesis_f_nonzero: bool
    hypothesis_ef_orthogonal: bool
    hypothesis_f_in_h_perp: bool
    e_nef_verdict: Verdict
    line_condition: Optional[LineCondition]
    overall: str
    onset_m: Optional[Fraction] = None
    onset: object = None
    pt_witness_t: object = None
    pt_witness_self_intersection: Optional[QuadValue] = None

    HYPOTHESES = (
        "hypothesis_e_nonzero",
        "hypothesis_e_null",
        "hypothesis_e_boundary",
        "hypothesis_f_nonzero",
        "hypothesis_ef_orthogonal",
        "hypothesis_f_in_h_perp",
    )

    @property
    def failed(self) -> list[str]:
        out = [name for name in self.HYPOTHESES if not getattr(self, name)]
        if self.line_condition is not None and self.line_condition.kind == "FAILED":
            out.append("line_condition")
        return out

    def to_dict(self):
        def opt(x):
            if x is None:
                return None
            return format_quad(x)

        return {
            "h": self.h.to_text(),
            "e": self.e.to_text(),
            "f": self.f.to_text(),
            **{name: getattr(self, name) for name in self.HYPOTHESES},
            "e_nef_verdict": self.e_nef_verdict.to_dict(),
            "line_condition": None if self.line_condition is None else self.line_condition.to_dict(),
            "onset_m": opt(self.onset_m),
            "positivity_onset": opt(self.onset),
            "pt_witness_t": opt(self.pt_witness_t),
            "pt_witness_self_intersection": opt(self.pt_witness_self_intersection),
            "failed": self.failed,
            "overall": self.overall,
        }


def _is_e2_delta_configuration(lat: Lattice, e: Divisor, f: Divisor) -> bool:
    if not (lat.is_product and lat.genus >= 2 and e.is_rational and f.is_rational):
        return False
    ec, fc = e.rational_coords(), f.rational_coords()
    e2 = (0, 1) + (0,) * (lat.rank - 2)
    return ec == e2 and fc[2] != 0 and fc[0] == fc[1] == 0 and not any(fc[3:])


def _line_condition(lat, e, f, samples) -> LineCondition:
    if _is_e2_delta_configuration(lat, e, f):
        # e2 + q delta has the closed-form separator for every q != 0; keep the
        # representatives q = +-1 (scaled by f) as checkable samples.
        seps = []
        for q in (Fraction(1), Fraction(-1)):
            sep = find_separator(lat, e + f * q)
            if sep is None or not sep.verify():
                return LineCondition("FAILED", (q,), witness=q)
            seps.append(sep)
        return LineCondition("ANALYTIC", (Fraction(1), Fraction(-1)), tuple(seps))

    seps = []
    for s in samples:
        verdict = psef_membership(lat, e + f * s)
        if verdict.status is not Status.CERTIFIED_OUT or not verdict.verify():
            return LineCondition("FAILED", tuple(samples), witness=s, witness_verdict=verdict)
        if isinstance(verdict.certificate, Separator):
            seps.append(verdict.certificate)
    return LineCondition("SAMPLED", tuple(samples), tuple(seps))


def check_criterion(
    lat: Lattice,
    h: Divisor,
    e: Divisor,
    f: Divisor,
    m=1,
    samples: Sequence[Fraction] = DEFAULT_LINE_SAMPLES,
) -> CriterionReport:
    """Check every hypothesis of the non-polyhedrality criterion exactly.

    The boundary hypothesis on e is established as: e nef (certified),
    e != 0 and (e.e) = 0, since interior psef classes are big and have
    positive self-intersection.
    """
    _same_lattice(h, e, f)
    if h.lattice != lat:
        raise LatticeMismatchError("h does not belong to this lattice")
    if pair(h, h).sign() <= 0:
        raise NonpositiveNormError(f"(h.h) = {pair(h, h)} is not positive")
    m = as_fraction(m)

    e_nonzero = not e.is_zero()
    e_null = not pair(e, e)
    e_nef = nef_membership(lat, e)
    e_boundary = e_nonzero and e_null and e_nef.status is Status.CERTIFIED_IN
    f_nonzero = not f.is_zero()
    ef_orth = not pair(e, f)
    f_perp = not pair(f, h)
    hyps = (e_nonzero, e_null, e_boundary, f_nonzero, ef_orth, f_perp)

    line = None
    onset = witness_t = witness_p = None
    overall = "HYPOTHESIS_FAILED"
    if all(hyps):
        line = _line_condition(lat, e, f, samples)
        if line.kind == "ANALYTIC":
            overall = "NON_POLYHEDRAL_CERTIFIED"
        elif line.kind == "SAMPLED":
            overall = "NON_POLYHEDRAL_EVIDENCE"
        if pair(e, h).sign() > 0:
            onset = positivity_onset(e, h, f, m)
            witness_t = (QuadValue.coerce(onset) + 1) / 2
            witness_p = pt_self_intersection_factored(e, h, f, m, witness_t)
            witness_t = _unwrap(witness_t)

    return CriterionReport(
        h=h,
        e=e,
        f=f,
        hypothesis_e_nonzero=e_nonzero,
        hypothesis_e_null=e_null,
        hypothesis_e_boundary=e_boundary,
        hypothesis_f_nonzero=f_nonzero,
        hypothesis_ef_orthogonal=ef_orth,
        hypothesis_f_in_h_perp=f_perp,
        e_nef_verdict=e_nef,
        line_condition=line,
        overall=overall,
        onset_m=m,
        onset=onset,
        pt_witness_t=witness_t,
        pt_witness_self_intersection=witness_p,
    )
