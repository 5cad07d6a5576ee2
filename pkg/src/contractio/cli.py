"""Batch command-line front end.

Commands::

    contractio check <file>       validate definitions only
    contractio analyze <file>     full analysis report per group
    contractio classify <file>    simplicity decision and label per group
    contractio structure <file>   torsion x divisible structure report
    contractio verify <file>      property suite (seeded, deterministic)

Exit codes: 0 success; 1 validation failure (parse errors included); 2 any
property-check failure (a non-simple group in a classify query counts);
3 uncertified results when --strict is given.
"""

from __future__ import annotations

import argparse
import random
import sys

from .dsl import parse, print_document
from .errors import UncertifiedError, UncertifiedFactorizationError, ValidationError
from .groupmodel import module_delta, random_element
from .reports import build_analysis, render_structured, render_text
from .series import (
    Mode,
    canonical_series,
    check_length_bound,
    check_module_multiplicativity,
    check_special_chain,
    composition_series,
    jordan_holder_verify,
)
from .theorems import classify_simple, is_simple_contraction, verify_structure

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_PROPERTY = 2
EXIT_UNCERTIFIED = 3


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="contractio",
        description="Exact analysis of contraction groups in the block model.",
    )
    ap.add_argument("command", choices=["check", "analyze", "classify", "structure", "verify"])
    ap.add_argument("file", help="group definition file")
    ap.add_argument("--mode", choices=["alpha", "alpha-normal"], default=None,
                    help="restrict series reports to one operator mode")
    ap.add_argument("--precision", type=int, default=None,
                    help="p-adic working precision (overrides the file setting)")
    ap.add_argument("--seed", type=int, default=None,
                    help="seed for all randomized checks (overrides the file setting)")
    ap.add_argument("--samples", type=int, default=25,
                    help="sample count for elementwise verification")
    ap.add_argument("--strict", action="store_true",
                    help="exit 3 when any result is uncertified")
    ap.add_argument("--format", choices=["text", "structured"], default="text")
    return ap


def run(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    args = _build_parser().parse_args(argv)
    try:
        with open(args.file, "r", encoding="utf-8") as fh:
            source = fh.read()
    except OSError as exc:
        print(f"error: {exc}", file=out)
        return EXIT_VALIDATION
    try:
        doc = parse(source)
    except ValidationError as exc:
        print(f"error: {args.file}:{exc}", file=out)
        return EXIT_VALIDATION
    precision = args.precision if args.precision is not None else doc.settings.precision
    seed = args.seed if args.seed is not None else doc.settings.seed
    modes = (
        (Mode(args.mode),)
        if args.mode
        else (Mode.ALPHA, Mode.ALPHA_NORMAL)
    )
    groups = sorted(doc.groups, key=lambda item: item[0])

    if args.command == "check":
        report = {
            "file": args.file,
            "groups": {name: {"blocks": G.describe(), "valid": True} for name, G in groups},
            "document": print_document(doc).rstrip("\n").split("\n"),
        }
        _emit(report, args, out)
        return EXIT_OK

    failure = False
    uncertified = False
    reports = []

    if args.command == "analyze":
        for name, G in groups:
            rep = build_analysis(name, G, precision, seed, modes=modes, samples=args.samples)
            uncertified = uncertified or rep["uncertified"]
            if not rep["structure"]["all_ok"]:
                failure = True
            reports.append(rep)
    elif args.command == "classify":
        for name, G in groups:
            entry = {"group": name, "blocks": G.describe()}
            try:
                if is_simple_contraction(G, precision):
                    entry["simple"] = True
                    entry["label"] = str(classify_simple(G, precision))
                else:
                    entry["simple"] = False
                    failure = True
            except UncertifiedError as exc:
                entry["simple"] = "uncertified"
                entry["detail"] = str(exc)
                uncertified = True
            reports.append(entry)
    elif args.command == "structure":
        for name, G in groups:
            sr = verify_structure(G, samples=args.samples, seed=seed)
            entry = {
                "group": name,
                "t_alpha": sr.t_alpha,
                "torsion_exponent": sr.torsion_exponent,
                "primes": [p for p, _ in sr.primes],
                "flags": {k: v for k, v in sr.flags},
            }
            if not sr.all_ok():
                failure = True
            reports.append(entry)
    elif args.command == "verify":
        for name, G in groups:
            entry = {"group": name}
            checks = {}
            try:
                checks.update(_verify_group(G, precision, seed, args.samples, modes))
            except UncertifiedFactorizationError as exc:
                checks["series"] = f"uncertified: {exc}"
                uncertified = True
            entry["checks"] = checks
            bad = [k for k, v in checks.items() if v is False]
            if bad:
                failure = True
                entry["failed"] = bad
            reports.append(entry)

    payload = {"file": args.file, "command": args.command, "reports": reports}
    _emit(payload, args, out)
    if failure:
        return EXIT_PROPERTY
    if uncertified and args.strict:
        return EXIT_UNCERTIFIED
    return EXIT_OK


def _verify_group(G, precision, seed, samples, modes) -> dict:
    checks = {}
    rng = random.Random(seed)
    ident = G.identity()
    ok = True
    for _ in range(samples):
        x = random_element(G, rng)
        if G.apply_alpha(G.apply_alpha_inverse(x)) != x:
            ok = False
        if G.multiply(x, G.inverse(x)) != ident:
            ok = False
    checks["automorphism_inverse"] = ok
    checks["delta"] = module_delta(G)
    for mode in modes:
        s1 = composition_series(G, mode, seed=seed * 2 + 1, precision=precision)
        s2 = composition_series(G, mode, seed=seed * 2 + 2, precision=precision)
        rep = jordan_holder_verify(G, s1, s2)
        checks[f"jordan_holder[{mode.value}]"] = rep.equal
        checks[f"length_bound[{mode.value}]"] = check_length_bound(G, s1)
        checks[f"module_product[{mode.value}]"] = check_module_multiplicativity(G, s1)
    checks["canonical_special"] = check_special_chain(G, canonical_series(G))
    sr = verify_structure(G, samples=samples, seed=seed)
    for k, v in sr.flags:
        checks[f"structure.{k}"] = v
    return checks


def _emit(payload, args, out):
    if args.format == "structured":
        out.write(render_structured(payload))
    else:
        out.write(render_text(payload))


def main() -> None:
    sys.exit(run())
