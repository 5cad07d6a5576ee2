"""Shared test helpers: a seeded corpus generator for block groups, and
independent brute-force oracles that never call the library's own
subgroup machinery (plain loops over raw Cayley tables only)."""

from __future__ import annotations

import random
from fractions import Fraction

from contractio.finitegroup import make_catalog_group
from contractio.groupmodel import (
    ContractionGroup,
    HeisenbergBlock,
    LinearBlock,
    ShiftBlock,
)
from contractio.linalg import companion_matrix, mat_mul, mat_inv, identity_matrix
from contractio.padic import Poly

CORPUS_PRIMES = (2, 3, 5, 7)

_CATALOG_POOL = None


def catalog_pool():
    """Catalog groups of order <= 24."""
    global _CATALOG_POOL
    if _CATALOG_POOL is None:
        pool = []
        for n in range(2, 25):
            pool.append(make_catalog_group("cyclic", n))
        for n in range(3, 13):
            if 2 * n <= 24:
                pool.append(make_catalog_group("dihedral", n))
        pool.append(make_catalog_group("symmetric", 3))
        pool.append(make_catalog_group("symmetric", 4))
        pool.append(make_catalog_group("alternating", 4))
        _CATALOG_POOL = tuple(pool)
    return _CATALOG_POOL


def random_irreducible_pieces(rng: random.Random, p: int, dims: int):
    """Distinct monic rational polynomials, certified-irreducible over Q_p
    and contractive, with degrees summing to dims."""
    pieces = []
    seen = set()
    remaining = dims
    while remaining > 0:
        deg = 2 if remaining >= 2 and rng.random() < 0.4 else 1
        if deg == 1:
            unit = rng.choice([u for u in range(1, 10) if u % p != 0])
            k = rng.randint(1, 2)
            sign = rng.choice([1, -1])
            f = Poly([Fraction(-sign * unit * p ** k), 1])
        else:
            # Eisenstein: X^2 + a p X + b p with b a unit
            a = rng.randint(0, 3)
            b = rng.choice([u for u in range(1, 8) if u % p != 0])
            sign = rng.choice([1, -1])
            f = Poly([Fraction(sign * b * p), Fraction(a * p), 1])
        if f.coeffs in seen:
            continue
        seen.add(f.coeffs)
        pieces.append(f)
        remaining -= f.degree
    return pieces


def random_unimodular(rng: random.Random, d: int):
    u = identity_matrix(d)
    for _ in range(rng.randint(1, 4)):
        i, j = rng.sample(range(d), 2) if d > 1 else (0, 0)
        if i == j:
            continue
        c = rng.choice([-2, -1, 1, 2])
        shear = [
            [Fraction(1 if r == s else 0) + (Fraction(c) if (r, s) == (i, j) else 0) for s in range(d)]
            for r in range(d)
        ]
        u = mat_mul(u, tuple(tuple(row) for row in shear))
    return u


def random_linear_block(rng: random.Random, p=None, max_dim=4) -> LinearBlock:
    p = p or rng.choice(CORPUS_PRIMES)
    dims = rng.randint(1, max_dim)
    pieces = random_irreducible_pieces(rng, p, dims)
    d = sum(f.degree for f in pieces)
    block_mat = [[Fraction(0)] * d for _ in range(d)]
    offset = 0
    for f in pieces:
        comp = companion_matrix(f)
        k = f.degree
        for i in range(k):
            for j in range(k):
                block_mat[offset + i][offset + j] = comp[i][j]
        offset += k
    a = tuple(tuple(row) for row in block_mat)
    u = random_unimodular(rng, d)
    a = mat_mul(mat_mul(u, a), mat_inv(u))
    return LinearBlock.create(p, a)


def random_block(rng: random.Random):
    kind = rng.choice(["shift", "shift", "linear", "linear", "heisenberg"])
    if kind == "shift":
        return ShiftBlock(rng.choice(catalog_pool()))
    if kind == "linear":
        return random_linear_block(rng)
    p = rng.choice(CORPUS_PRIMES)
    return HeisenbergBlock(p, rng.randint(1, 2), rng.randint(1, 2))


def random_group(rng: random.Random, max_blocks=5) -> ContractionGroup:
    n = rng.randint(1, max_blocks)
    return ContractionGroup([random_block(rng) for _ in range(n)])


def corpus(count: int, seed: int = 20260809):
    rng = random.Random(seed)
    return [random_group(rng) for _ in range(count)]


# ---------------------------------------------------------------------------
# brute-force oracles over raw tables (independent of the library internals)
# ---------------------------------------------------------------------------


def brute_closure(table, gens):
    members = {0}
    members.update(gens)
    changed = True
    while changed:
        changed = False
        cur = list(members)
        for a in cur:
            for b in cur:
                c = table[a][b]
                if c not in members:
                    members.add(c)
                    changed = True
    return frozenset(members)


def brute_all_subgroups(table):
    """Closures of all generator pairs; complete for the groups used in the
    acceptance suite (every subgroup there is 2-generated)."""
    n = len(table)
    subs = {frozenset({0})}
    for a in range(n):
        for b in range(a, n):
            subs.add(brute_closure(table, [a, b]))
    return subs


def brute_inverse(table, a):
    return next(b for b in range(len(table)) if table[a][b] == 0)


def brute_is_normal(table, members):
    n = len(table)
    ms = set(members)
    for g in range(n):
        gi = brute_inverse(table, g)
        for x in ms:
            if table[table[g][x]][gi] not in ms:
                return False
    return True


def brute_normal_subgroups(table):
    return [s for s in brute_all_subgroups(table) if brute_is_normal(table, s)]


def brute_is_simple(table):
    n = len(table)
    if n < 2:
        return False
    return all(len(s) in (1, n) for s in brute_normal_subgroups(table))


def brute_sub_table(table, members):
    elems = sorted(members)
    index = {e: i for i, e in enumerate(elems)}
    return [[index[table[a][b]] for b in elems] for a in elems]


def brute_quotient_table(table, members):
    n = len(table)
    coset_of = [-1] * n
    reps = []
    for x in range(n):
        if coset_of[x] != -1:
            continue
        idx = len(reps)
        reps.append(x)
        for h in members:
            coset_of[table[x][h]] = idx
    return [
        [coset_of[table[reps[a]][reps[b]]] for b in range(len(reps))]
        for a in range(len(reps))
    ], coset_of


def brute_composition_factor_orders(table):
    """Multiset of composition factor orders by walking maximal proper
    normal subgroups of the enumerated lattice."""
    n = len(table)
    if n == 1:
        return []
    normals = [s for s in brute_normal_subgroups(table) if len(s) < n]
    maximal = max(normals, key=len)
    quotient, _ = brute_quotient_table(table, maximal)
    assert brute_is_simple(quotient)
    return brute_composition_factor_orders(brute_sub_table(table, maximal)) + [len(quotient)]
