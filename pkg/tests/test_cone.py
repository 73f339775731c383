import json
import random
from fractions import Fraction as F

import pytest

from nefcone.cone import (
    BignessWitness,
    EffectiveCombination,
    NefDecomposition,
    NefWitness,
    PairingWitness,
    RoundConeWitness,
    Status,
    Verdict,
    check_criterion,
    nef_membership,
    positivity_onset,
    psef_membership,
    pt_bracket,
    pt_class,
    pt_self_intersection_factored,
    reference_ample,
)
from nefcone.errors import LatticeMismatchError, NonpositiveNormError, PreconditionViolated
from nefcone.lattice import Divisor, extend_with_negative_block, p1_x_p1_lattice, pair, product_lattice
from nefcone.scalar import QuadValue
from nefcone.vojta import Separator, VojtaParams, vojta_class

from oracles import expand_product_pairing, genus0_nef, genus1_nef, rand_fraction

IN, OUT, UNKNOWN = Status.CERTIFIED_IN, Status.CERTIFIED_OUT, Status.UNKNOWN


def onset_oracle(g):
    # e = e2, h = h0, f = delta, m = 1: h' = h0/2, A = 1/8 - 2g, B = 1/4, t0 = A/(A - 1/2)
    return F(16 * g - 1, 16 * g + 3)


def kernel(rows):
    """Rational basis of {v : row . v = 0 for every row}; plain Gauss-Jordan."""
    n = len(rows[0])
    m = [list(map(F, r)) for r in rows]
    pivots, r = [], 0
    for c in range(n):
        p = next((i for i in range(r, len(m)) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        m[r] = [x / m[r][c] for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                m[i] = [a - m[i][c] * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    basis = []
    for free in (c for c in range(n) if c not in pivots):
        v = [F(0)] * n
        v[free] = F(1)
        for i, pc in enumerate(pivots):
            v[pc] = -m[i][free]
        basis.append(v)
    return basis


def gram_times(lat, v):
    return [sum(F(lat.gram[i][j]) * v[j] for j in range(lat.rank)) for i in range(lat.rank)]


def gram_pair(lat, u, v):
    return sum(a * b for a, b in zip(u, gram_times(lat, v)))


# -- psef ---------------------------------------------------------------------


def test_psef_examples(lat2):
    v = psef_membership(lat2, lat2.divisor([1, 1, 1]))
    assert v.status is IN and isinstance(v.certificate, EffectiveCombination)
    assert [(c.to_text(), w) for c, w in v.certificate.terms] == [("1,1,1", 1)]

    v = psef_membership(lat2, lat2.divisor([1, 1, 0]))
    assert v.status is IN
    assert isinstance(v.certificate, (EffectiveCombination, BignessWitness))
    assert expand_product_pairing(2, (1, 1, 0), (1, 1, 0)) == 2

    v = psef_membership(lat2, lat2.divisor([0, 1, 1]))
    assert v.status is OUT and isinstance(v.certificate, Separator)
    p = v.certificate.params
    assert (p.r, p.s, p.sign) == (12, 1, 1)
    assert v.certificate.pairing == F(-7, 2)
    for verdict in (v, psef_membership(lat2, lat2.divisor([1, 1, 0]))):
        assert verdict.verify()


def test_psef_bigness_path(lat2):
    # z < 0 rules out any combination of e1, e2, Delta; the square is 6 - 4 = 2 > 0
    v = psef_membership(lat2, lat2.divisor([3, 1, -1]))
    assert v.status is IN and isinstance(v.certificate, BignessWitness)
    assert v.verify()


def test_psef_out_by_registered_nef(lat2):
    v = psef_membership(lat2, lat2.divisor([-1, 5, 0]))
    assert v.status is OUT and isinstance(v.certificate, NefWitness)
    assert v.certificate.pairing == -1
    assert v.verify()


def test_psef_unknown_is_honest(lat2):
    # the class of the graph of the hyperelliptic involution lies here; it is effective
    v = psef_membership(lat2, lat2.divisor([1, 1, -1]))
    assert v.status is UNKNOWN and v.certificate is None and v.verify()


def test_psef_genus0():
    lat = p1_x_p1_lattice()
    assert psef_membership(lat, lat.divisor([2, 3])).status is IN
    assert psef_membership(lat, lat.divisor([-1, 3])).status is OUT


# -- nef ----------------------------------------------------------------------


def test_nef_examples(lat2):
    p1 = p1_x_p1_lattice()
    assert nef_membership(p1, p1.divisor([3, 5])).status is IN

    y = lat2.divisor([F(1, 2), 6, 1])
    v = nef_membership(lat2, y)
    assert v.status is IN
    cert = v.certificate
    assert isinstance(cert, NefDecomposition)
    assert (cert.params.r, cert.params.s, cert.scale, cert.mu1, cert.mu2) == (12, 1, 1, 0, 0)
    assert v.verify()

    a = lat2.divisor([1, 1, -1])
    v = nef_membership(lat2, a)
    assert v.status is OUT
    assert expand_product_pairing(2, (1, 1, -1), (1, 1, 1)) == 6
    assert v.certificate.other is None and v.certificate.pairing == -2
    assert v.verify()


def test_nef_out_by_effective_pairing(lat2):
    v = nef_membership(lat2, lat2.divisor([-1, 2, 0]))
    assert v.status is OUT and isinstance(v.certificate, PairingWitness)
    assert v.certificate.other is not None and v.verify()


@pytest.mark.parametrize("g", [2, 3, 5])
def test_vojta_classes_are_certified_nef(g):
    lat = product_lattice(g)
    for r in (nef_threshold_plus(g, 1), F(1000)):
        for sign in (1, -1):
            y = vojta_class(VojtaParams(g, r, 1, sign), lat)
            if not y.is_rational:
                continue
            v = nef_membership(lat, y)
            assert v.status is IN and v.verify()


def nef_threshold_plus(g, s):
    # next perfect-square multiple above the threshold keeps Y rational: r = (g+s) k^2
    k = 1
    while (g + s) * k * k <= F((g + s) * (g - 1), s):
        k += 1
    return (g + s) * k * k


def test_e2_plus_small_delta_nef(lat2):
    # (e2 + q delta)^2 = -2g q^2 < 0
    v = nef_membership(lat2, lat2.divisor([0, 1, F(1, 100)]))
    assert v.status is OUT and v.certificate.pairing == F(-1, 2500)
    v = nef_membership(lat2, lat2.divisor([F(1, 10), 1, F(1, 10)]))
    assert v.status in (IN, UNKNOWN) and v.verify()


def test_nef_extended_lattice_extra_coordinates_unknown():
    lat = extend_with_negative_block(product_lattice(2), [-1])
    assert nef_membership(lat, lat.divisor([3, 3, 0, F(1, 2)])).status is UNKNOWN
    assert nef_membership(lat, lat.divisor([3, 3, 0, 0])).status is IN


def test_membership_rejects_foreign_lattice(lat2):
    with pytest.raises(LatticeMismatchError):
        nef_membership(product_lattice(3), lat2["e1"])
    with pytest.raises(LatticeMismatchError):
        psef_membership(product_lattice(3), lat2["e1"])


def test_genus0_exact():
    lat = p1_x_p1_lattice()
    rng = random.Random(31)
    for _ in range(1000):
        x, y = rand_fraction(rng), rand_fraction(rng)
        v = nef_membership(lat, lat.divisor([x, y]))
        assert v.status is (IN if genus0_nef(x, y) else OUT)
        assert v.verify()


def test_genus1_exact():
    lat = product_lattice(1)
    rng = random.Random(37)
    for i in range(1000):
        x, y, z = (rand_fraction(rng, bound=10, max_den=8) for _ in range(3))
        if i % 4 == 0:
            # land exactly on the null cone: xy = z^2
            x = z * z / y if y else x
        v = nef_membership(lat, lat.divisor([x, y, z]))
        assert v.status is (IN if genus1_nef(x, y, z) else OUT)
        if v.status is IN:
            assert isinstance(v.certificate, RoundConeWitness)
        assert v.verify()


# -- soundness and duality --------------------------------------------------


def _random_class(rng, lat):
    kind = rng.random()
    coords = [rand_fraction(rng, bound=8, max_den=10) for _ in range(lat.rank)]
    if kind < 0.3:
        coords[0], coords[1] = abs(coords[0]) + 1, abs(coords[1]) + 1
    elif kind < 0.45:
        coords = [0, 1, rand_fraction(rng, bound=2, max_den=100)] + [0] * (lat.rank - 3)
    return lat.divisor(coords)


LATTICES = [product_lattice(2), product_lattice(3), product_lattice(5), extend_with_negative_block(product_lattice(2), [-1])]


def test_verdicts_verify_and_never_contradict():
    rng = random.Random(41)
    for i in range(400):
        lat = LATTICES[i % len(LATTICES)]
        a = _random_class(rng, lat)
        nef = nef_membership(lat, a)
        psef = psef_membership(lat, a)
        assert nef.verify() and psef.verify()
        # nef is inside psef
        assert not (nef.status is IN and psef.status is OUT)
        # positive rescaling leaves both verdicts unchanged
        lam = F(rng.randint(1, 30), rng.randint(1, 30))
        assert nef_membership(lat, a * lam).status is nef.status
        assert psef_membership(lat, a * lam).status is psef.status
        # negation: a nonzero class and its negative are never both psef
        if not a.is_zero() and psef.status is IN:
            assert psef_membership(lat, -a).status is not IN


def test_duality_of_certified_classes():
    rng = random.Random(43)
    lat = product_lattice(3)
    nef_pool, psef_pool = [], []
    while len(nef_pool) < 60 or len(psef_pool) < 60:
        a = _random_class(rng, lat)
        if len(nef_pool) < 60 and nef_membership(lat, a).status is IN:
            nef_pool.append(a)
        if len(psef_pool) < 60 and psef_membership(lat, a).status is IN:
            psef_pool.append(a)
    pairs = 0
    for _ in range(500):
        a, b = rng.choice(nef_pool), rng.choice(psef_pool)
        assert pair(a, b) >= 0
        assert expand_product_pairing(3, a.rational_coords(), b.rational_coords()) >= 0
        pairs += 1
    assert pairs == 500


def test_tampered_certificates_fail(lat2):
    good = psef_membership(lat2, lat2.divisor([0, 1, 1]))
    other = lat2.divisor([0, 1, 2])
    assert not Verdict("psef", other, OUT, good.certificate).verify()
    assert not Verdict("psef", good.alpha, IN, good.certificate).verify()
    assert not Verdict("nef", good.alpha, OUT, None).verify()
    bad = EffectiveCombination(((lat2["e1"], F(-1)),))
    assert not bad.verify(-lat2["e1"])
    bogus = NefDecomposition(VojtaParams(2, 3, 1), F(1), F(0), F(0))  # r at threshold: not certified
    assert not bogus.verify(vojta_class(VojtaParams(2, 3, 1), lat2))
    assert not NefWitness(lat2["e1"], QuadValue(-1)).verify(lat2.divisor([5, 5, 0]))


def test_verdict_json(lat2):
    for v in (
        psef_membership(lat2, lat2.divisor([0, 1, 1])),
        nef_membership(lat2, lat2.divisor([F(1, 2), 6, 1])),
        psef_membership(lat2, lat2.divisor([1, 1, -1])),
    ):
        d = json.loads(json.dumps(v.to_dict()))
        assert d["status"] == v.status.value and d["class"] == v.alpha.to_text()
    d = psef_membership(lat2, lat2.divisor([0, 1, 1])).to_dict()
    assert d["certificate"]["kind"] == "separator" and d["certificate"]["pairing"] == "-7/2"


# -- the segment P_t ----------------------------------------------------------


def test_reference_ample(lat2):
    h0 = reference_ample(lat2)
    assert h0.rational_coords() == (F(1, 2), F(1, 2), 0)
    assert pair(h0, h0) == F(1, 2)
    ext = extend_with_negative_block(lat2, [-1, -2])
    assert reference_ample(ext).rational_coords() == (F(1, 2), F(1, 2), 0, 0, 0)


def test_pt_examples(lat2):
    h0, e2, d = reference_ample(lat2), lat2["e2"], lat2["delta"]
    p = pt_class(e2, h0, d, 1, F(1, 2))
    assert p.rational_coords() == (F(1, 8), F(5, 8), F(1, 2))
    t = F(9, 10)
    # (1/10) [(1/10)(1/8) + (1/10)(-4) + (9/5)(1/4)]
    hand = F(1, 10) * (F(1, 10) * F(1, 8) + F(1, 10) * -4 + F(9, 5) * F(1, 4))
    assert pt_self_intersection_factored(e2, h0, d, 1, t) == hand == F(1, 160)
    p = pt_class(e2, h0, d, 1, t)
    assert pair(p, p) == F(1, 160)


def test_pt_preconditions(lat2):
    h0 = reference_ample(lat2)
    with pytest.raises(PreconditionViolated):
        pt_self_intersection_factored(lat2["e1"] + lat2["e2"], h0, lat2["delta"], 1, F(1, 2))
    with pytest.raises(PreconditionViolated):
        positivity_onset(lat2["e2"], h0, lat2["e1"], 1)
    with pytest.raises(PreconditionViolated):
        positivity_onset(lat2["e2"], -h0, lat2["delta"], 1)


@pytest.mark.parametrize("g", range(2, 11))
def test_onset_closed_form(g):
    lat = product_lattice(g)
    t0 = positivity_onset(lat["e2"], reference_ample(lat), lat["delta"], 1)
    assert t0 == onset_oracle(g)


def test_onset_examples(lat2):
    h0, e2, d = reference_ample(lat2), lat2["e2"], lat2["delta"]
    t0 = positivity_onset(e2, h0, d, 1)
    assert t0 == F(31, 35)
    assert pt_bracket(e2, h0, d, 1, t0) == 0
    assert pt_bracket(e2, h0, d, 1, (t0 + 1) / 2) > 0
    assert pt_bracket(e2, h0, d, 1, t0 / 2) < 0
    assert positivity_onset(e2, h0, d, 0) == 0


def _random_pt_inputs(rng):
    g = rng.randint(2, 6)
    extra = [F(-rng.randint(1, 5), rng.randint(1, 3)) for _ in range(rng.randint(0, 2))]
    lat = extend_with_negative_block(product_lattice(g), extra)
    pad = [0] * len(extra)
    # a null class: xy = g z^2
    z = rand_fraction(rng, bound=3, max_den=5)
    x = rand_fraction(rng, bound=3, max_den=5, nonzero=True)
    e = [x, g * z * z / x, z] + pad
    h = [rand_fraction(rng, bound=5, max_den=6) for _ in range(lat.rank)]
    basis = kernel([gram_times(lat, e), gram_times(lat, h)])
    fv = [F(0)] * lat.rank
    for b in basis:
        c = rand_fraction(rng, bound=4, max_den=5)
        fv = [a + c * bi for a, bi in zip(fv, b)]
    m = rand_fraction(rng, bound=4, max_den=7)
    t = rand_fraction(rng, bound=2, max_den=11)
    assert gram_pair(lat, e, e) == gram_pair(lat, e, fv) == gram_pair(lat, h, fv) == 0
    return lat, e, h, fv, m, t


def test_pt_identity_random():
    rng = random.Random(47)
    for _ in range(1000):
        lat, e, h, fv, m, t = _random_pt_inputs(rng)
        E, H, Fd = (Divisor(v, lat) for v in (e, h, fv))
        p = pt_class(E, H, Fd, m, t)
        direct = gram_pair(lat, p.rational_coords(), p.rational_coords())
        assert pt_self_intersection_factored(E, H, Fd, m, t) == direct
        assert pair(p, p) == direct
        assert pt_self_intersection_factored(E, H, Fd, m, 1) == 0
        assert pair(pt_class(E, H, Fd, m, 1), pt_class(E, H, Fd, m, 1)) == 0


def test_onset_property_random():
    rng = random.Random(53)
    seen_positive = 0
    for _ in range(300):
        lat, e, h, fv, m, _ = _random_pt_inputs(rng)
        E, H, Fd = (Divisor(v, lat) for v in (e, h, fv))
        if pair(E, H) <= 0:
            E = -E
        if pair(E, H) == 0:
            continue
        t0 = positivity_onset(E, H, Fd, m)
        assert 0 <= t0 < 1
        assert pt_bracket(E, H, Fd, m, (t0 + 1) / 2) > 0
        if t0 > 0:
            seen_positive += 1
            assert pt_bracket(E, H, Fd, m, t0 / 2) <= 0
    assert seen_positive > 50


# -- criterion ------------------------------------------------------------------


@pytest.mark.parametrize("g", range(2, 11))
def test_criterion_certified(g):
    lat = product_lattice(g)
    rep = check_criterion(lat, reference_ample(lat), lat["e2"], lat["delta"])
    assert rep.overall == "NON_POLYHEDRAL_CERTIFIED"
    assert rep.line_condition.kind == "ANALYTIC"
    assert rep.failed == []
    assert rep.e_nef_verdict.status is IN and rep.e_nef_verdict.verify()
    assert all(s.verify() for s in rep.line_condition.separators)
    assert rep.onset == onset_oracle(g)
    assert rep.pt_witness_self_intersection > 0


def test_criterion_g2_report(lat2):
    rep = check_criterion(lat2, reference_ample(lat2), lat2["e2"], lat2["delta"])
    assert rep.pt_witness_t == F(33, 35)
    assert rep.pt_witness_self_intersection == F(1, 70)
    d = json.loads(json.dumps(rep.to_dict()))
    assert d["overall"] == "NON_POLYHEDRAL_CERTIFIED"
    assert d["positivity_onset"] == "31/35"
    assert d["line_condition"]["kind"] == "ANALYTIC"


@pytest.mark.parametrize(
    "e, f, violated",
    [((1, 1, 0), (0, 0, 1), "hypothesis_e_null"), ((0, 1, 0), (1, 0, 0), "hypothesis_f_in_h_perp"), ((0, 1, 0), (0, 0, 0), "hypothesis_f_nonzero")],
)
def test_criterion_negative(lat2, e, f, violated):
    rep = check_criterion(lat2, reference_ample(lat2), lat2.divisor(e), lat2.divisor(f))
    assert rep.overall == "HYPOTHESIS_FAILED"
    assert violated in rep.failed
    assert rep.line_condition is None


def test_criterion_sampled(lat2):
    rep = check_criterion(lat2, reference_ample(lat2), lat2["e2"] * 2, lat2["delta"])
    assert rep.overall == "NON_POLYHEDRAL_EVIDENCE"
    assert rep.line_condition.kind == "SAMPLED"
    assert len(rep.line_condition.separators) == len(rep.line_condition.tested)
    assert all(s.verify() for s in rep.line_condition.separators)


def test_criterion_line_failure_is_reported():
    lat = extend_with_negative_block(product_lattice(2), [-1])
    rep = check_criterion(lat, reference_ample(lat), lat["e2"], lat["x1"])
    assert rep.line_condition.kind == "FAILED"
    assert "line_condition" in rep.failed
    assert rep.overall == "HYPOTHESIS_FAILED"
    assert rep.line_condition.witness_verdict.verify()


def test_criterion_rejects_nonpositive_h(lat2):
    with pytest.raises(NonpositiveNormError):
        check_criterion(lat2, lat2["e1"], lat2["e2"], lat2["delta"])
