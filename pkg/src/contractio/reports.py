"""Analysis reports: one data structure, two renderings.

Reports are plain nested dicts with deterministic insertion order, rendered
either as a line-oriented ``key = value`` text document or as JSON.  No
timestamps or machine information appear anywhere, so outputs are stable
across runs and suitable for golden-file comparison.
"""

from __future__ import annotations

import json

from .errors import UncertifiedError, UncertifiedFactorizationError
from .groupmodel import ContractionGroup, module_delta
from .series import (
    Mode,
    PadicFactor,
    SeriesChain,
    TorsionFactor,
    canonical_series,
    check_length_bound,
    check_module_multiplicativity,
    check_special_chain,
    composition_series,
    jordan_holder_verify,
)
from .theorems import classify_simple, is_simple_contraction, t_alpha, verify_structure
from .dsl import print_block
from .padic import poly_to_str


def factor_entry(f) -> dict:
    if isinstance(f, TorsionFactor):
        return {
            "kind": "torsion",
            "label": str(f.label),
            "order": f.label.order,
            "module": f.module,
        }
    return {
        "kind": "padic",
        "p": f.p,
        "poly": poly_to_str(f.poly),
        "certification": f.certification.value,
        "module": f.module,
    }


def chain_entry(G: ContractionGroup, chain: SeriesChain) -> dict:
    out = {
        "mode": chain.mode.value,
        "length": chain.length,
        "factors": [factor_entry(f) for f in chain.flat_factors()],
        "length_bound_ok": check_length_bound(G, chain),
    }
    if chain.flat_factors():
        out["module_product_ok"] = check_module_multiplicativity(G, chain)
    out["steps"] = [
        "[" + " | ".join(str(s) for s in desc) + "]" for desc in chain.steps
    ]
    if chain.tie_break:
        out["tie_break"] = list(chain.tie_break)
    return out


def build_analysis(
    name: str,
    G: ContractionGroup,
    precision: int,
    seed: int,
    modes=(Mode.ALPHA, Mode.ALPHA_NORMAL),
    samples: int = 25,
) -> dict:
    report: dict = {
        "group": name,
        "blocks": " * ".join(print_block(b) for b in G.blocks) or "trivial",
        "delta": module_delta(G),
    }
    uncertified = False
    series = {}
    for mode in modes:
        try:
            chain = composition_series(G, mode, precision=precision)
        except UncertifiedFactorizationError as exc:
            uncertified = True
            chain = exc.partial_chain
            if isinstance(chain, SeriesChain):
                entry = chain_entry(G, chain)
                entry["uncertified"] = True
                series[mode.value] = entry
            else:
                series[mode.value] = {"mode": mode.value, "uncertified": True}
            continue
        series[mode.value] = chain_entry(G, chain)
    report["series"] = series
    canon = canonical_series(G)
    report["canonical"] = {
        "length": canon.length,
        "steps": ["[" + " | ".join(str(s) for s in desc) + "]" for desc in canon.steps],
        "special_ok": check_special_chain(G, canon),
    }
    try:
        simple = is_simple_contraction(G, precision)
        if simple:
            report["classification"] = {"simple": True, "label": str(classify_simple(G, precision))}
        else:
            report["classification"] = {"simple": False}
    except UncertifiedError as exc:
        uncertified = True
        report["classification"] = {"simple": "uncertified", "detail": str(exc)}
    structure = verify_structure(G, samples=samples, seed=seed)
    report["structure"] = {
        "t_alpha": structure.t_alpha,
        "torsion_exponent": structure.torsion_exponent,
        "primes": [p for p, _ in structure.primes],
        "flags": {k: v for k, v in structure.flags},
        "all_ok": structure.all_ok(),
    }
    report["uncertified"] = uncertified
    return report


def render_text(report: dict) -> str:
    lines: list = []
    _render_into(report, lines, "")
    return "\n".join(lines) + "\n"


def _render_into(value, lines: list, prefix: str):
    if isinstance(value, dict):
        for k, v in value.items():
            key = f"{prefix}{k}"
            if isinstance(v, (dict, list)):
                lines.append(f"{key}:")
                _render_nested(v, lines, "  ")
            else:
                lines.append(f"{key} = {_scalar(v)}")
    else:
        lines.append(f"{prefix}{_scalar(value)}")


def _render_nested(value, lines: list, indent: str):
    if isinstance(value, dict):
        for k, v in value.items():
            if isinstance(v, (dict, list)):
                lines.append(f"{indent}{k}:")
                _render_nested(v, lines, indent + "  ")
            else:
                lines.append(f"{indent}{k} = {_scalar(v)}")
    elif isinstance(value, list):
        for i, v in enumerate(value):
            if isinstance(v, (dict, list)):
                lines.append(f"{indent}- [{i}]")
                _render_nested(v, lines, indent + "  ")
            else:
                lines.append(f"{indent}- {_scalar(v)}")


def _scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def render_structured(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"
