"""Classification of simple blocks and the torsion x divisible decomposition.

A group in the block model is simple exactly when it is a single block that
is either a shift block over a simple finite group or a linear block whose
characteristic polynomial is certified irreducible over Q_p.  Multi-block
groups and Heisenberg blocks always have proper stable normal subgroups
(block subproducts, the centre), so simplicity is decided structurally.

The structure decomposition sorts blocks into the torsion part (shift
blocks) and the divisible part grouped by prime, computes the exponent bound
t_alpha as the module of the inverse automorphism on the torsion part, and
verifies the decomposition elementwise on seeded samples: powers by t_alpha
kill torsion components, divisible components admit unique n-th roots.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .errors import NotSimpleError, UncertifiedError
from .finitegroup import FiniteGroup, IsoLabel, is_simple_finite, iso_finite, iso_label
from .groupmodel import (
    ContractionGroup,
    GroupElement,
    HeisenbergBlock,
    LinearBlock,
    ShiftBlock,
    module_delta,
    random_element,
)
from .linalg import companion_matrix
from .padic import (
    Certification,
    DEFAULT_PRECISION,
    PAdicContext,
    Poly,
    factor_over_qp,
    is_contractive_poly,
    polys_congruent,
)


@dataclass(frozen=True)
class ClassificationLabel:
    """Isomorphism label of a simple group: a finite simple group for the
    torsion case, or (p, certified irreducible contractive f, companion
    matrix) for the torsion-free case."""

    kind: str  # "torsion" | "padic"
    finite_label: IsoLabel | None = None
    finite_group: FiniteGroup | None = None
    p: int | None = None
    poly: Poly | None = None
    companion: tuple | None = None

    def __str__(self):
        if self.kind == "torsion":
            return f"TorsionSimple({self.finite_label})"
        return f"PadicSimple(p={self.p}, f={self.poly})"


def is_simple_contraction(G: ContractionGroup, precision: int = DEFAULT_PRECISION) -> bool:
    """No stable closed normal subgroups except the trivial one and G.

    Raises UncertifiedError when irreducibility of a linear block cannot be
    decided at the working precision.
    """
    if len(G.blocks) != 1:
        return False
    b = G.blocks[0]
    if isinstance(b, ShiftBlock):
        if b.group.order < 2:
            return False
        return is_simple_finite(b.group)
    if isinstance(b, HeisenbergBlock):
        return False
    fact = factor_over_qp(b.char, PAdicContext(b.p, precision))
    if len(fact.factors) == 1:
        only = fact.factors[0]
        if only.irreducible:
            return True
        raise UncertifiedError(
            f"irreducibility of {b.char} undecided at precision {b.p}^{precision}"
        )
    return False


def classify_simple(G: ContractionGroup, precision: int = DEFAULT_PRECISION) -> ClassificationLabel:
    """Complete isomorphism invariant of a simple group: the finite simple
    group of a shift block, or the characteristic polynomial (with its
    companion normal form) of a linear block."""
    if not is_simple_contraction(G, precision):
        raise NotSimpleError(f"{G.describe()} is not simple")
    b = G.blocks[0]
    if isinstance(b, ShiftBlock):
        return ClassificationLabel(
            kind="torsion", finite_label=iso_label(b.group), finite_group=b.group
        )
    return ClassificationLabel(
        kind="padic", p=b.p, poly=b.char, companion=companion_matrix(b.char)
    )


def rational_normal_form(f: Poly) -> tuple:
    """Companion matrix of a monic polynomial; contractive iff all
    coefficient valuations below the leading one are >= 1."""
    return companion_matrix(f)


def iso_simple(G: ContractionGroup, H: ContractionGroup, precision: int = DEFAULT_PRECISION) -> bool:
    """Simple groups are isomorphic iff same kind and the labels agree:
    isomorphic finite groups, or equal (p, f).  Raises UncertifiedError when
    polynomials agree only as approximations at working precision."""
    a = classify_simple(G, precision)
    b = classify_simple(H, precision)
    if a.kind != b.kind:
        return False
    if a.kind == "torsion":
        return iso_finite(a.finite_group, b.finite_group)
    if a.p != b.p:
        return False
    return a.poly == b.poly


def compare_padic_labels(
    f: Poly,
    g: Poly,
    p: int,
    precision: int,
    f_exact: bool = True,
    g_exact: bool = True,
) -> bool:
    """Polynomial label equality at working precision.  Distinct residues
    give False; equal residues give True when both sides are exact and
    raise UncertifiedError when either side is Hensel-approximated."""
    if not polys_congruent(f, g, p, precision):
        return False
    if f_exact and g_exact and f == g:
        return True
    raise UncertifiedError(
        f"labels agree mod {p}^{precision} but at least one is approximate"
    )


# ---------------------------------------------------------------------------
# Theorem B: torsion x divisible decomposition
# ---------------------------------------------------------------------------


def torsion_part(G: ContractionGroup) -> ContractionGroup:
    """The subgroup of torsion elements: exactly the shift blocks."""
    return ContractionGroup([b for b in G.blocks if isinstance(b, ShiftBlock)])


def divisible_part(G: ContractionGroup) -> list:
    """The infinitely divisible part, grouped by prime: [(p, G_p), ...]
    with each G_p a product of linear and Heisenberg blocks over p."""
    primes = sorted({b.p for b in G.blocks if not isinstance(b, ShiftBlock)})
    return [
        (p, ContractionGroup([b for b in G.blocks if not isinstance(b, ShiftBlock) and b.p == p]))
        for p in primes
    ]


def t_alpha(G: ContractionGroup) -> int:
    """Module of the inverse automorphism on the torsion part; the exponent
    of the torsion part divides it, which is asserted on every call."""
    T = torsion_part(G)
    t = module_delta(T)
    exponent = 1
    for b in T.blocks:
        exponent = math.lcm(exponent, b.group.exponent())
    if T.blocks and t % exponent:
        raise AssertionError(f"exponent {exponent} does not divide t_alpha {t}")
    return t


@dataclass(frozen=True)
class StructureReport:
    """Outcome of the decomposition checks; acceptance requires every flag
    to be True on every generated group."""

    group: str
    torsion_blocks: tuple  # indices into G.blocks
    primes: tuple  # ((p, block indices), ...)
    t_alpha: int
    torsion_exponent: int
    samples: int
    seed: int
    root_bound: int
    flags: tuple  # ((name, bool), ...)

    def all_ok(self) -> bool:
        return all(ok for _, ok in self.flags)


def verify_structure(
    G: ContractionGroup,
    samples: int = 25,
    seed: int = 0,
    root_bound: int = 50,
) -> StructureReport:
    """Elementwise verification of the decomposition G = tor(G) x dv(G).

    For seeded sample elements x: x**t_alpha has trivial shift components;
    the divisible components admit n-th roots for n = 1..root_bound, the
    roots are unique (power maps are injective on samples), and recombining
    the torsion blocks with the per-prime divisible groups restores G.
    """
    rng = random.Random(seed)
    T = torsion_part(G)
    t = t_alpha(G)
    exponent = 1
    for b in T.blocks:
        exponent = math.lcm(exponent, b.group.exponent())
    torsion_idx = tuple(i for i, b in enumerate(G.blocks) if isinstance(b, ShiftBlock))
    primes = tuple(
        (p, tuple(i for i, b in enumerate(G.blocks) if not isinstance(b, ShiftBlock) and b.p == p))
        for p in sorted({b.p for b in G.blocks if not isinstance(b, ShiftBlock)})
    )

    exponent_divides = (t % exponent == 0) if T.blocks else True

    torsion_killed = True
    roots_exist = True
    roots_unique = True
    sampled = []
    for _ in range(samples):
        x = random_element(G, rng)
        sampled.append(x)
        y = G.power(x, t)
        for i in torsion_idx:
            if y.parts[i] != ():
                torsion_killed = False
        # project to the divisible blocks and take explicit roots
        xd = _divisible_projection(G, x)
        for n in range(1, root_bound + 1):
            r = G.nth_root(xd, n)
            if G.power(r, n) != xd:
                roots_exist = False
                break
    # uniqueness of roots in the torsion-free part: power maps injective
    for _ in range(samples):
        u = _divisible_projection(G, random_element(G, rng))
        w = _divisible_projection(G, random_element(G, rng))
        if u != w:
            for m in range(1, 13):
                if G.power(u, m) == G.power(w, m):
                    roots_unique = False
                    break

    covered = sorted(list(torsion_idx) + [i for _, idxs in primes for i in idxs])
    recombines = covered == list(range(len(G.blocks)))
    # elementwise spot check of the sorting: torsion part elements are
    # torsion, non-trivial divisible projections are torsion-free
    sorting_ok = True
    for x in sampled:
        xt = _torsion_projection(G, x)
        if not G.is_torsion(xt):
            sorting_ok = False
        xd = _divisible_projection(G, x)
        if xd != G.identity() and G.is_torsion(xd) and any(
            xd.parts[i] != G.identity().parts[i] for i in range(len(G.blocks))
        ):
            sorting_ok = False

    flags = (
        ("exponent_divides_t_alpha", exponent_divides),
        ("t_alpha_kills_torsion", torsion_killed),
        ("divisible_roots_exist", roots_exist),
        ("divisible_roots_unique", roots_unique),
        ("recombination_equals_group", recombines),
        ("torsion_divisible_sorting", sorting_ok),
    )
    return StructureReport(
        group=G.describe(),
        torsion_blocks=torsion_idx,
        primes=primes,
        t_alpha=t,
        torsion_exponent=exponent,
        samples=samples,
        seed=seed,
        root_bound=root_bound,
        flags=flags,
    )


def _divisible_projection(G: ContractionGroup, x: GroupElement) -> GroupElement:
    ident = G.identity()
    parts = [
        ident.parts[i] if isinstance(b, ShiftBlock) else x.parts[i]
        for i, b in enumerate(G.blocks)
    ]
    return GroupElement(tuple(parts))


def _torsion_projection(G: ContractionGroup, x: GroupElement) -> GroupElement:
    ident = G.identity()
    parts = [
        x.parts[i] if isinstance(b, ShiftBlock) else ident.parts[i]
        for i, b in enumerate(G.blocks)
    ]
    return GroupElement(tuple(parts))
