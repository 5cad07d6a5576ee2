"""Finite groups as Cayley tables.

Elements are 0..n-1 with 0 the identity.  Construction validates the table
exhaustively (associativity via numpy when the order allows it), normal
closures drive simplicity testing, and composition / chief series are built
recursively through subgroup and quotient tables.  Subgroup-lattice walks are
budgeted at order <= 256; the catalog constructor goes up to order 5040.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
import math
import random

import numpy as np

from .errors import TooLargeError, ValidationError

CATALOG_ORDER_LIMIT = 5040
LATTICE_ORDER_LIMIT = 256
ISO_ORDER_LIMIT = 256
_FULL_VALIDATION_LIMIT = 1024


class FiniteGroup:
    """Immutable Cayley-table group with 0 as identity."""

    __slots__ = ("table", "name", "_orders", "_invs", "_abelian")

    def __init__(self, table, name=None, validate=True, _trusted=False):
        rows = tuple(tuple(int(x) for x in row) for row in table)
        object.__setattr__(self, "table", rows)
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "_orders", None)
        object.__setattr__(self, "_invs", None)
        object.__setattr__(self, "_abelian", None)
        if validate and not _trusted:
            self.validate()

    def __setattr__(self, name, value):
        raise AttributeError("FiniteGroup is immutable")

    @property
    def order(self) -> int:
        return len(self.table)

    def op(self, a: int, b: int) -> int:
        return self.table[a][b]

    def validate(self) -> None:
        """Exhaustive group-axiom check; raises ValidationError on failure."""
        n = self.order
        if n == 0:
            raise ValidationError("empty table")
        for i, row in enumerate(self.table):
            if len(row) != n:
                raise ValidationError(f"row {i} has length {len(row)}, expected {n}")
            for x in row:
                if not 0 <= x < n:
                    raise ValidationError(f"entry {x} out of range in row {i}")
        for i in range(n):
            if self.table[0][i] != i or self.table[i][0] != i:
                raise ValidationError("0 is not a two-sided identity")
        for i in range(n):
            if not any(self.table[i][j] == 0 and self.table[j][i] == 0 for j in range(n)):
                raise ValidationError(f"element {i} has no two-sided inverse")
        if n > _FULL_VALIDATION_LIMIT:
            raise TooLargeError(
                f"full associativity check not attempted at order {n} (> {_FULL_VALIDATION_LIMIT})"
            )
        t = np.array(self.table, dtype=np.int64)
        for i in range(n):
            # (i*j)*k vs i*(j*k) for all j, k at once
            if not np.array_equal(t[t[i], :], t[i][t]):
                raise ValidationError(f"associativity fails at element {i}")

    def inverse(self, a: int) -> int:
        invs = self._inverses()
        return invs[a]

    def _inverses(self):
        if self._invs is None:
            n = self.order
            invs = [0] * n
            for i in range(n):
                for j in range(n):
                    if self.table[i][j] == 0:
                        invs[i] = j
                        break
            object.__setattr__(self, "_invs", tuple(invs))
        return self._invs

    def element_order(self, a: int) -> int:
        orders = self.element_orders()
        return orders[a]

    def element_orders(self):
        if self._orders is None:
            out = []
            for a in range(self.order):
                k, x = 1, a
                while x != 0:
                    x = self.table[x][a]
                    k += 1
                out.append(k)
            object.__setattr__(self, "_orders", tuple(out))
        return self._orders

    @property
    def is_abelian(self) -> bool:
        if self._abelian is None:
            n = self.order
            ab = all(
                self.table[i][j] == self.table[j][i]
                for i in range(n)
                for j in range(i + 1, n)
            )
            object.__setattr__(self, "_abelian", ab)
        return self._abelian

    def exponent(self) -> int:
        return math.lcm(*self.element_orders()) if self.order else 1

    def conjugate(self, g: int, x: int) -> int:
        return self.table[self.table[g][x]][self.inverse(g)]

    def power(self, a: int, k: int) -> int:
        k %= self.element_order(a)
        x = 0
        for _ in range(k):
            x = self.table[x][a]
        return x

    # -- subgroup machinery -------------------------------------------------

    def closure(self, gens) -> frozenset:
        members = {0}
        frontier = [g for g in gens if g != 0]
        members.update(frontier)
        while frontier:
            new = []
            for a in frontier:
                for b in list(members):
                    for c in (self.table[a][b], self.table[b][a]):
                        if c not in members:
                            members.add(c)
                            new.append(c)
            frontier = new
        return frozenset(members)

    def normal_closure(self, elems) -> frozenset:
        gens = set()
        for x in elems:
            for g in range(self.order):
                gens.add(self.conjugate(g, x))
        # the closure of a conjugation-closed set is conjugation-closed
        return self.closure(gens)

    def is_subgroup(self, members) -> bool:
        ms = set(members)
        if 0 not in ms:
            return False
        return all(self.table[a][b] in ms for a in ms for b in ms)

    def is_normal(self, members) -> bool:
        ms = set(members)
        return self.is_subgroup(ms) and all(
            self.conjugate(g, x) in ms for x in ms for g in range(self.order)
        )

    def subgroup_group(self, members):
        """(group on the members, old->new index map); identity stays 0."""
        elems = sorted(members)
        assert elems[0] == 0
        index = {e: i for i, e in enumerate(elems)}
        table = [[index[self.table[a][b]] for b in elems] for a in elems]
        return FiniteGroup(table, validate=False, _trusted=True), index

    def quotient_group(self, normal_members):
        """(quotient group, coset index per element) for a normal subgroup."""
        n = self.order
        members = frozenset(normal_members)
        coset_of = [-1] * n
        reps = []
        for x in range(n):
            if coset_of[x] != -1:
                continue
            idx = len(reps)
            reps.append(x)
            for h in members:
                coset_of[self.table[x][h]] = idx
        # identity coset must be index 0: representative 0 is seen first
        table = [
            [coset_of[self.table[reps[a]][reps[b]]] for b in range(len(reps))]
            for a in range(len(reps))
        ]
        return FiniteGroup(table, validate=False, _trusted=True), tuple(coset_of)

    def minimal_normal_subgroups(self) -> list:
        """Minimal non-trivial normal subgroups, via single-element closures."""
        self._require_lattice_budget()
        candidates = {}
        for x in range(1, self.order):
            cl = self.normal_closure([x])
            candidates[cl] = min(candidates.get(cl, x), x)
        mins = []
        for cl in candidates:
            if not any(other < cl for other in candidates):
                mins.append(cl)
        # deterministic enumeration order: by size then smallest member
        mins.sort(key=lambda s: (len(s), sorted(s)))
        return mins

    def _require_lattice_budget(self):
        if self.order > LATTICE_ORDER_LIMIT:
            raise TooLargeError(
                f"subgroup enumeration budget is order <= {LATTICE_ORDER_LIMIT}, got {self.order}"
            )

    def __repr__(self):
        label = self.name or f"order{self.order}"
        return f"FiniteGroup({label})"

    def __eq__(self, other):
        return isinstance(other, FiniteGroup) and self.table == other.table

    def __hash__(self):
        return hash(self.table)


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------


def _perm_group_table(perms):
    """Cayley table for a list of permutation tuples, identity first."""
    n = len(perms)
    k = len(perms[0])
    if n <= 1000:
        index = {p: i for i, p in enumerate(perms)}
        table = [[0] * n for _ in range(n)]
        for i, a in enumerate(perms):
            for j, b in enumerate(perms):
                table[i][j] = index[tuple(a[b[t]] for t in range(k))]
        return table
    arr = np.array(perms, dtype=np.int64)
    weights = (len(perms[0])) ** np.arange(k, dtype=np.int64)
    keys = arr @ weights
    order = np.argsort(keys)
    sorted_keys = keys[order]
    table = np.empty((n, n), dtype=np.int64)
    for i in range(n):
        comp = arr[i][arr]  # row j is perms[i] after perms[j]
        comp_keys = comp @ weights
        pos = np.searchsorted(sorted_keys, comp_keys)
        table[i] = order[pos]
    return table.tolist()


def _perm_parity(p) -> int:
    seen = [False] * len(p)
    parity = 0
    for i in range(len(p)):
        if seen[i]:
            continue
        j, cyc = i, 0
        while not seen[j]:
            seen[j] = True
            j = p[j]
            cyc += 1
        parity ^= (cyc - 1) & 1
    return parity


def make_catalog_group(family: str, n: int) -> FiniteGroup:
    """Catalog groups: cyclic, symmetric, alternating, dihedral.

    DSL tokens C<n>, S<n>, A<n>, D<n>; D<n> is the dihedral group of order
    2n.  Orders beyond 5040 raise TooLargeError.
    """
    family = family.lower()
    if n < 1:
        raise ValidationError(f"catalog parameter must be >= 1, got {n}")
    if family == "cyclic":
        order = n
        if order > CATALOG_ORDER_LIMIT:
            raise TooLargeError(f"order {order} exceeds catalog budget {CATALOG_ORDER_LIMIT}")
        table = [[(i + j) % n for j in range(n)] for i in range(n)]
        return FiniteGroup(table, name=f"C{n}", validate=False, _trusted=True)
    if family == "dihedral":
        order = 2 * n
        if order > CATALOG_ORDER_LIMIT:
            raise TooLargeError(f"order {order} exceeds catalog budget {CATALOG_ORDER_LIMIT}")
        # element 2r + s is rotation r with s flips; (r1,s1)(r2,s2) =
        # (r1 + (-1)^s1 r2, s1+s2)
        def enc(r, s):
            return 2 * r + s

        table = [[0] * order for _ in range(order)]
        for r1 in range(n):
            for s1 in range(2):
                for r2 in range(n):
                    for s2 in range(2):
                        r = (r1 + (r2 if s1 == 0 else -r2)) % n
                        table[enc(r1, s1)][enc(r2, s2)] = enc(r, (s1 + s2) % 2)
        return FiniteGroup(table, name=f"D{n}", validate=False, _trusted=True)
    if family in ("symmetric", "alternating"):
        order = math.factorial(n) // (1 if family == "symmetric" else 2)
        if order > CATALOG_ORDER_LIMIT:
            raise TooLargeError(f"order {order} exceeds catalog budget {CATALOG_ORDER_LIMIT}")
        perms = [
            p
            for p in itertools.permutations(range(n))
            if family == "symmetric" or _perm_parity(p) == 0
        ]
        name = ("S" if family == "symmetric" else "A") + str(n)
        return FiniteGroup(_perm_group_table(perms), name=name, validate=False, _trusted=True)
    raise ValidationError(f"unknown catalog family {family!r}")


def catalog_from_token(token: str) -> FiniteGroup:
    """C12 / S4 / A5 / D6 tokens."""
    fam = {"C": "cyclic", "S": "symmetric", "A": "alternating", "D": "dihedral"}.get(token[:1])
    if fam is None or not token[1:].isdigit():
        raise ValidationError(f"unknown finite-group token {token!r}")
    return make_catalog_group(fam, int(token[1:]))


# ---------------------------------------------------------------------------
# simplicity, composition series, chief series
# ---------------------------------------------------------------------------


def is_simple_finite(F: FiniteGroup) -> bool:
    """True iff the only normal subgroups are trivial and F itself."""
    if F.order < 2:
        raise ValidationError("simplicity needs order >= 2")
    F._require_lattice_budget()
    full = F.order
    return all(len(F.normal_closure([x])) == full for x in range(1, full))


@dataclass(frozen=True)
class FiniteSeries:
    """Ascending chain of subgroups of F with per-step factor groups."""

    subgroups: tuple  # frozensets, from {0} to all of F
    factors: tuple  # FiniteGroup per step, the section group


def composition_series_finite(F: FiniteGroup, seed=None) -> FiniteSeries:
    """A composition series of F (each step normal in the next, simple
    quotients).  The factor multiset is seed-independent; the seed only
    changes the tie-breaking among minimal normal subgroups."""
    F._require_lattice_budget()
    rng = random.Random(seed) if seed is not None else None
    chain, factors = _composition_chain(F, rng)
    return FiniteSeries(subgroups=tuple(chain), factors=tuple(factors))


def _composition_chain(F: FiniteGroup, rng):
    if F.order == 1:
        return [frozenset({0})], []
    mins = F.minimal_normal_subgroups()
    pick = rng.choice(mins) if rng is not None else mins[0]
    if len(pick) == F.order:
        # F itself is its only non-trivial normal subgroup: F is simple
        return [frozenset({0}), frozenset(range(F.order))], [F]
    sub, index = F.subgroup_group(pick)
    back = {v: k for k, v in index.items()}
    sub_chain, sub_factors = _composition_chain(sub, rng)
    chain = [frozenset(back[i] for i in step) for step in sub_chain]
    factors = list(sub_factors)
    quo, coset_of = F.quotient_group(pick)
    quo_chain, quo_factors = _composition_chain(quo, rng)
    for step in quo_chain[1:]:
        chain.append(frozenset(x for x in range(F.order) if coset_of[x] in step))
    factors.extend(quo_factors)
    return chain, factors


def chief_series_finite(F: FiniteGroup, seed=None) -> FiniteSeries:
    """Ascending chain of subgroups each normal in F, with no normal-in-F
    refinement: the factors are minimal normal subgroups of the successive
    quotients (characteristically simple groups)."""
    F._require_lattice_budget()
    rng = random.Random(seed) if seed is not None else None
    chain = [frozenset({0})]
    factors = []
    current = frozenset({0})
    while len(current) < F.order:
        quo, coset_of = F.quotient_group(current)
        mins = quo.minimal_normal_subgroups()
        pick = rng.choice(mins) if rng is not None else mins[0]
        factor_group, _ = quo.subgroup_group(pick)
        factors.append(factor_group)
        current = frozenset(x for x in range(F.order) if coset_of[x] in pick)
        chain.append(current)
    return FiniteSeries(subgroups=tuple(chain), factors=tuple(factors))


def section_group(F: FiniteGroup, lower, upper):
    """The group upper/lower for lower normal in upper (subgroups of F)."""
    sub, index = F.subgroup_group(upper)
    lower_in_sub = frozenset(index[x] for x in lower)
    quo, _ = sub.quotient_group(lower_in_sub)
    return quo


# ---------------------------------------------------------------------------
# isomorphism labels and exact isomorphism testing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IsoLabel:
    """Relabeling-invariant fingerprint: order, abelian flag, element-order
    multiset, plus a catalog name when one matches.  Equal labels are
    necessary for isomorphism; the exact search settles the rest."""

    order: int
    abelian: bool
    element_orders: tuple
    name: str | None = None

    def key(self):
        return (self.order, self.abelian, self.element_orders)

    def __str__(self):
        return self.name or f"group(order={self.order})"


@lru_cache(maxsize=None)
def _catalog_candidates(order: int):
    cands = []
    if order <= LATTICE_ORDER_LIMIT:
        cands.append(make_catalog_group("cyclic", order))
        if order % 2 == 0 and order >= 6:
            cands.append(make_catalog_group("dihedral", order // 2))
        for n in range(3, 9):
            if math.factorial(n) == order:
                cands.append(make_catalog_group("symmetric", n))
            if math.factorial(n) // 2 == order and n >= 4:
                cands.append(make_catalog_group("alternating", n))
    return tuple(cands)


def abelian_name(F: FiniteGroup) -> str:
    """Invariant-factor name of a finite abelian group, e.g. C2xC6.

    A finite abelian group is determined by its element-order multiset: for
    each prime, counting elements of order dividing p^k recovers the
    conjugate of the exponent partition.
    """
    assert F.is_abelian
    if F.order == 1:
        return "C1"
    orders = F.element_orders()
    per_prime = {}
    n = F.order
    for p in sorted(set(_int_prime_factors(n))):
        parts = []
        k = 1
        prev = sum(1 for o in orders if _p_part(o, p) <= 1)
        while True:
            cnt = sum(1 for o in orders if _p_part(o, p) <= p ** k)
            width = round(math.log(cnt / prev, p))
            if width == 0:
                break
            parts.append(width)
            prev = cnt
            k += 1
        # parts[k-1] = number of cyclic factors with exponent >= k
        exps = []
        for k_idx, width in enumerate(parts, start=1):
            while len(exps) < width:
                exps.append(0)
            for i in range(width):
                exps[i] = k_idx
        per_prime[p] = sorted(exps, reverse=True)
    width = max(len(v) for v in per_prime.values())
    invariant = []
    for i in range(width):
        d = 1
        for p, exps in per_prime.items():
            if i < len(exps):
                d *= p ** exps[i]
        invariant.append(d)
    invariant.sort()
    return "x".join(f"C{d}" for d in invariant)


def _p_part(n: int, p: int) -> int:
    out = 1
    while n % p == 0:
        out *= p
        n //= p
    return out


def _int_prime_factors(n: int):
    out = []
    d = 2
    while d * d <= n:
        while n % d == 0:
            out.append(d)
            n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def iso_label(F: FiniteGroup) -> IsoLabel:
    orders = tuple(sorted(F.element_orders()))
    name = None
    if F.name:
        name = F.name
    elif F.is_abelian:
        name = abelian_name(F)
    else:
        for cand in _catalog_candidates(F.order):
            if (
                cand.is_abelian == F.is_abelian
                and tuple(sorted(cand.element_orders())) == orders
                and iso_finite(F, cand)
            ):
                name = cand.name
                break
    return IsoLabel(order=F.order, abelian=F.is_abelian, element_orders=orders, name=name)


def iso_finite(F: FiniteGroup, G: FiniteGroup) -> bool:
    """Exact Cayley-table isomorphism test (order budget 256)."""
    if F.order != G.order:
        return False
    if F.order > ISO_ORDER_LIMIT:
        raise TooLargeError(f"exact isomorphism budget is order <= {ISO_ORDER_LIMIT}")
    if F.is_abelian != G.is_abelian:
        return False
    if tuple(sorted(F.element_orders())) != tuple(sorted(G.element_orders())):
        return False
    gens = _generating_sequence(F)
    by_order = {}
    for x in range(G.order):
        by_order.setdefault(G.element_order(x), []).append(x)
    return _extend_iso(F, G, gens, 0, {0: 0}, by_order)


def _generating_sequence(F: FiniteGroup):
    gens = []
    have = F.closure([])
    # prefer high-order elements: fewer candidate images, better pruning
    order_sorted = sorted(range(F.order), key=lambda x: -F.element_order(x))
    while len(have) < F.order:
        nxt = next(x for x in order_sorted if x not in have)
        gens.append(nxt)
        have = F.closure(gens)
    return gens


def _extend_iso(F, G, gens, k, partial, by_order):
    if k == len(gens):
        return len(partial) == F.order
    g = gens[k]
    for img in by_order.get(F.element_order(g), ()):
        if img in partial.values():
            continue
        new = _grow_map(F, G, dict(partial), g, img)
        if new is not None and _extend_iso(F, G, gens, k + 1, new, by_order):
            return True
    return False


def _grow_map(F, G, mapping, gen, img):
    """Close the partial map under products with gen; None on contradiction."""
    if gen in mapping:
        return mapping if mapping[gen] == img else None
    mapping[gen] = img
    used = set(mapping.values())
    if len(used) != len(mapping):
        return None
    frontier = list(mapping.keys())
    while frontier:
        nxt = []
        for a in frontier:
            for b in list(mapping.keys()):
                for x, y in ((F.table[a][b], G.table[mapping[a]][mapping[b]]),
                             (F.table[b][a], G.table[mapping[b]][mapping[a]])):
                    if x in mapping:
                        if mapping[x] != y:
                            return None
                    else:
                        if y in used:
                            return None
                        mapping[x] = y
                        used.add(y)
                        nxt.append(x)
        frontier = nxt
    return mapping
