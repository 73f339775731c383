"""Command line front end.

Examples::

    nefcone pair --genus 2 --class 0,0,1 --class 0,0,1
    nefcone separate --genus 2 --target 0,1,1/100
    nefcone criterion --genus 3
    nefcone slice --genus 2 --grid 64 --extent 2 --csv slice.csv --svg slice.svg

Exit codes: 0 success (and NON_POLYHEDRAL_CERTIFIED), 1 domain or parse
error, 2 HYPOTHESIS_FAILED, 3 evidence only; ``separate`` exits 1 when no
separator was found.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import cone, slice as slicing
from .errors import NefConeError, ParseError
from .lattice import (
    Lattice,
    extend_with_negative_block,
    p1_x_p1_lattice,
    pair,
    parse_divisor,
    product_lattice,
    signature,
)
from .scalar import format_quad, format_rational, parse_rational
from .vojta import SearchBudget, VojtaParams, find_separator, is_nef_certified, vojta_class

CRITERION_EXIT = {
    "NON_POLYHEDRAL_CERTIFIED": 0,
    "HYPOTHESIS_FAILED": 2,
    "NON_POLYHEDRAL_EVIDENCE": 3,
}


def _normalize(text: str) -> str:
    return text.replace("−", "-")


def build_lattice(genus: int, extra_block: str | None) -> Lattice:
    lat = p1_x_p1_lattice() if genus == 0 else product_lattice(genus)
    if extra_block:
        diag = [parse_rational(x) for x in _normalize(extra_block).split(",") if x.strip()]
        lat = extend_with_negative_block(lat, diag)
    return lat


def _divisor(text: str, lat: Lattice):
    return parse_divisor(_normalize(text), lat)


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2))


def cmd_gram(args, lat):
    rows = [[format_rational(x) for x in row] for row in lat.gram]
    if args.json:
        _emit({"labels": list(lat.basis_labels), "gram": rows})
    else:
        for row in rows:
            print(",".join(row))
    return 0


def cmd_signature(args, lat):
    sig = signature(lat)
    if args.json:
        _emit({"signature": list(sig)})
    else:
        print("({},{},{})".format(*sig))
    return 0


def cmd_pair(args, lat):
    if len(args.classes) != 2:
        raise ParseError("pair needs exactly two --class arguments")
    a, b = (_divisor(c, lat) for c in args.classes)
    value = pair(a, b)
    if args.json:
        _emit({"a": a.to_text(), "b": b.to_text(), "pairing": format_quad(value)})
    else:
        print(format_quad(value))
    return 0


def cmd_vojta(args, lat):
    sign = -1 if args.sign in ("-", "-1") else 1
    params = VojtaParams(lat.genus, parse_rational(args.r), parse_rational(args.s), sign)
    y = vojta_class(params, lat)
    out = {
        "g": params.g,
        "r": format_rational(params.r),
        "s": format_rational(params.s),
        "sign": "+" if sign > 0 else "-",
        "class": y.to_text(),
        "threshold": format_rational(params.threshold),
        "nef_margin": format_rational(params.nef_margin),
        "certified_nef": is_nef_certified(params),
    }
    if args.json:
        _emit(out)
    else:
        print(out["class"])
        print(f"threshold {out['threshold']}, certified nef: {str(out['certified_nef']).lower()}")
    return 0


def cmd_separate(args, lat):
    target = _divisor(args.target, lat)
    sep = find_separator(lat, target, SearchBudget(max_s_exponent=args.max_s_exponent))
    if sep is None:
        _emit({"status": "NONE_FOUND", "target": target.to_text()})
        return 1
    _emit(sep.to_dict())
    return 0


def cmd_member(args, lat):
    alpha = _divisor(args.cls, lat)
    oracle = cone.nef_membership if args.cone == "nef" else cone.psef_membership
    verdict = oracle(lat, alpha)
    if args.json:
        _emit(verdict.to_dict())
    else:
        print(verdict.status.value)
    return 0


def cmd_criterion(args, lat):
    h = _divisor(args.h, lat) if args.h else cone.reference_ample(lat)
    e = _divisor(args.e, lat) if args.e else lat["e2"]
    if args.f:
        f = _divisor(args.f, lat)
    elif lat.is_product:
        f = lat["delta"]
    else:
        raise ParseError("--f is required on this lattice")
    report = cone.check_criterion(lat, h, e, f, m=parse_rational(args.m))
    _emit(report.to_dict())
    return CRITERION_EXIT[report.overall]


def cmd_slice(args, lat):
    extent = parse_rational(args.extent)
    samples = slicing.sample_grid(lat, args.grid, extent)
    csv_text = slicing.write_csv(samples)
    svg_text = slicing.render_svg(samples, lat.genus, args.grid, extent)
    try:
        Path(args.csv).write_text(csv_text, encoding="utf-8")
        Path(args.svg).write_text(svg_text, encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 1
    counts = {}
    for s in samples:
        key = (s.nef.value, s.psef.value)
        counts[key] = counts.get(key, 0) + 1
    if args.json:
        _emit({
            "csv": str(args.csv),
            "svg": str(args.svg),
            "samples": len(samples),
            "counts": [{"nef": k[0], "psef": k[1], "count": v} for k, v in sorted(counts.items())],
        })
    else:
        print(f"wrote {len(samples)} samples to {args.csv} and {args.svg}")
    return 0


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--genus", type=int, default=2, help="genus of C (0 selects P1 x P1)")
    common.add_argument("--extra-block", default=None, help='negative diagonal entries, e.g. "-1,-1"')
    common.add_argument("--json", action="store_true", help="structured output")

    parser = argparse.ArgumentParser(prog="nefcone", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gram", parents=[common], help="print the Gram matrix")
    p.set_defaults(func=cmd_gram)
    p = sub.add_parser("signature", parents=[common], help="inertia of the intersection form")
    p.set_defaults(func=cmd_signature)

    p = sub.add_parser("pair", parents=[common], help="intersection number of two classes")
    p.add_argument("--class", dest="classes", action="append", default=[], required=True)
    p.set_defaults(func=cmd_pair)

    p = sub.add_parser("vojta", parents=[common], help="the class Y(r,s)")
    p.add_argument("-r", required=True)
    p.add_argument("-s", required=True)
    p.add_argument("--sign", default="+", choices=["+", "-", "+1", "-1"])
    p.set_defaults(func=cmd_vojta)

    p = sub.add_parser("separate", parents=[common], help="separator certificate for a class")
    p.add_argument("--target", required=True)
    p.add_argument("--max-s-exponent", type=int, default=8)
    p.set_defaults(func=cmd_separate)

    p = sub.add_parser("member", parents=[common], help="cone membership verdict")
    p.add_argument("--class", dest="cls", required=True)
    p.add_argument("--cone", choices=["nef", "psef"], default="nef")
    p.set_defaults(func=cmd_member)

    p = sub.add_parser("criterion", parents=[common], help="check the non-polyhedrality criterion")
    p.add_argument("--h", default=None, help="ample class (default (e1+e2)/2)")
    p.add_argument("--e", default=None, help="null boundary class (default e2)")
    p.add_argument("--f", default=None, help="direction class (default delta)")
    p.add_argument("-m", default="1", help="offset used for the P_t positivity data")
    p.set_defaults(func=cmd_criterion)

    p = sub.add_parser("slice", parents=[common], help="CSV and SVG of a cone slice")
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--extent", default="2")
    p.add_argument("--csv", default="slice.csv")
    p.add_argument("--svg", default="slice.svg")
    p.set_defaults(func=cmd_slice)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        lat = build_lattice(args.genus, args.extra_block)
        return args.func(args, lat)
    except NefConeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
