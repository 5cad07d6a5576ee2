"""The contraction-group data model.

A group is an ordered product of blocks, each carrying its own contractive
automorphism: shift blocks (bi-infinite restricted products of a finite group
with the right shift), linear blocks (Q_p^d with a contractive matrix), and
Heisenberg blocks (the 3-dimensional unipotent witness with diagonal
weights).  Elements are exact: finite-support maps for shift components,
Fraction vectors for linear and Heisenberg components.

The scale module of alpha^-1 is computed blockwise in closed form and
cross-checked against a lattice-index oracle at level 0 on every call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg
from .errors import InconclusiveError, NoRootError, ValidationError
from .finitegroup import FiniteGroup
from .padic import INF, Poly, is_contractive_poly, is_prime, newton_polygon, valuation


# ---------------------------------------------------------------------------
# contractivity oracle (matrix powers + invariant lattice; Newton-free)
# ---------------------------------------------------------------------------


def default_power_budget(matrix, p: int) -> int:
    d = len(matrix)
    worst = 0
    for row in matrix:
        for x in row:
            if x != 0:
                worst = max(worst, abs(valuation(x, p)))
    return d * (1 + worst) + 8


def contractivity_oracle(matrix, p: int, k_max: int | None = None) -> bool:
    """Operational contractivity witness, independent of Newton polygons.

    True iff some power A^k (k <= k_max) has all entries of valuation >= 1;
    such a power contracts every lattice level.  False is certified on the
    matrix side alone: either the iterated column span of I, A, A^2, ...
    fails to stabilize (an eigenvalue has valuation < 0), or it stabilizes
    to an invariant lattice on which the induced integral matrix is not
    nilpotent mod p (an eigenvalue of valuation 0).  If k_max is exhausted
    with neither verdict the call raises InconclusiveError; it never guesses.
    """
    a = linalg.to_matrix(matrix)
    d = len(a)
    if linalg.det(a) == 0:
        raise ValidationError("matrix is singular")
    if k_max is None:
        k_max = default_power_budget(a, p)
    power = a
    best_bound = None
    for k in range(1, k_max + 1):
        v = linalg.min_entry_valuation(power, p)
        if v >= 1:
            return True
        bound = Fraction(int(v), k) if v != INF else None
        if bound is not None and (best_bound is None or bound > best_bound):
            best_bound = bound
        power = linalg.mat_mul(power, a)
    lattice = linalg.invariant_lattice(a, p)
    if lattice is None:
        return False
    basis_mat = linalg.transpose(tuple(lattice))
    s = linalg.mat_mul(linalg.mat_inv(basis_mat), linalg.mat_mul(a, basis_mat))
    mod_p = [[x.numerator * pow(x.denominator, -1, p) % p for x in row] for row in s]
    nil = _is_nilpotent_mod_p(mod_p, p, d)
    if not nil:
        return False
    raise InconclusiveError(
        f"no witness power within k_max={k_max}; eigenvalue-valuation lower bound "
        f"{best_bound if best_bound is not None else 0}"
    )


def _is_nilpotent_mod_p(m, p, d):
    cur = m
    for _ in range(max(1, d.bit_length())):
        if all(x == 0 for row in cur for x in row):
            return True
        cur = [
            [sum(cur[i][t] * cur[t][j] for t in range(d)) % p for j in range(d)]
            for i in range(d)
        ]
    return all(x == 0 for row in cur for x in row)


# ---------------------------------------------------------------------------
# blocks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShiftBlock:
    """Restricted product F^(-N) x F^(N0) with the right shift."""

    group: FiniteGroup

    @property
    def kind(self) -> str:
        return "shift"

    def describe(self) -> str:
        return f"shift({self.group.name or 'table'})"


@dataclass(frozen=True, eq=False)
class LinearBlock:
    """Q_p^d with a contractive invertible matrix acting linearly."""

    p: int
    matrix: tuple
    char: Poly = field(repr=False)
    inverse: tuple = field(repr=False)
    lattice_basis: tuple = field(repr=False)

    @staticmethod
    def create(p: int, rows) -> "LinearBlock":
        if not is_prime(p):
            raise ValidationError(f"{p} is not prime")
        a = linalg.to_matrix(rows)
        d = len(a)
        if d == 0 or any(len(r) != d for r in a):
            raise ValidationError("matrix must be square and non-empty")
        if linalg.det(a) == 0:
            raise ValidationError("matrix is singular")
        f = linalg.char_poly(a)
        if not is_contractive_poly(f, p):
            bad = next(v for v, _ in newton_polygon(f, p).root_valuations() if v <= 0)
            raise ValidationError(
                f"char poly {f} has root of valuation {bad}; matrix is not contractive"
            )
        if not contractivity_oracle(a, p):
            raise ValidationError("contractivity oracle contradicts the Newton criterion")
        lattice = linalg.invariant_lattice(a, p)
        assert lattice is not None
        return LinearBlock(p=p, matrix=a, char=f, inverse=linalg.mat_inv(a), lattice_basis=lattice)

    @property
    def dim(self) -> int:
        return len(self.matrix)

    @property
    def kind(self) -> str:
        return "linear"

    def describe(self) -> str:
        rows = ", ".join("[" + ", ".join(str(x) for x in r) + "]" for r in self.matrix)
        return f"linear(p={self.p}, matrix=[{rows}])"

    def __eq__(self, other):
        return (
            isinstance(other, LinearBlock)
            and self.p == other.p
            and self.matrix == other.matrix
        )

    def __hash__(self):
        return hash((self.p, self.matrix))


@dataclass(frozen=True)
class HeisenbergBlock:
    """3-dimensional unipotent group over Q_p.

    Law (x,y,z)(x',y',z') = (x+x', y+y', z+z'+x*y'); alpha scales the
    coordinates by p^a, p^b, p^(a+b), which is an automorphism precisely
    because the z-weight is the sum of the other two.
    """

    p: int
    a: int
    b: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValidationError(f"{self.p} is not prime")
        if self.a < 1 or self.b < 1:
            raise ValidationError("heisenberg weights must be >= 1")

    @property
    def kind(self) -> str:
        return "heisenberg"

    def describe(self) -> str:
        return f"heisenberg(p={self.p}, a={self.a}, b={self.b})"


Block = ShiftBlock | LinearBlock | HeisenbergBlock


# ---------------------------------------------------------------------------
# elements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroupElement:
    """One component per block: shift components are sorted (position,
    value-index) pairs with identity values omitted; linear and Heisenberg
    components are Fraction tuples."""

    parts: tuple

    def __str__(self):
        chunks = []
        for i, part in enumerate(self.parts):
            if isinstance(part, tuple) and part and isinstance(part[0], tuple):
                body = ", ".join(f"{pos}:{val}" for pos, val in part)
                chunks.append(f"{i}: {{{body}}}")
            else:
                chunks.append(f"{i}: ({', '.join(str(x) for x in part)})")
        return "{ " + "; ".join(chunks) + " }"


def _shift_canon(pairs) -> tuple:
    return tuple(sorted((pos, val) for pos, val in pairs if val != 0))


class ContractionGroup:
    """Ordered product of blocks with the blockwise automorphism."""

    __slots__ = ("blocks",)

    def __init__(self, blocks):
        object.__setattr__(self, "blocks", tuple(blocks))

    def __setattr__(self, name, value):
        raise AttributeError("ContractionGroup is immutable")

    def __eq__(self, other):
        return isinstance(other, ContractionGroup) and self.blocks == other.blocks

    def __hash__(self):
        return hash(self.blocks)

    def describe(self) -> str:
        if not self.blocks:
            return "trivial"
        return " * ".join(b.describe() for b in self.blocks)

    # -- element constructors ------------------------------------------------

    def identity(self) -> GroupElement:
        parts = []
        for b in self.blocks:
            if isinstance(b, ShiftBlock):
                parts.append(())
            elif isinstance(b, LinearBlock):
                parts.append(tuple(Fraction(0) for _ in range(b.dim)))
            else:
                parts.append((Fraction(0), Fraction(0), Fraction(0)))
        return GroupElement(tuple(parts))

    def element(self, parts) -> GroupElement:
        """Build and validate an element from per-block raw components."""
        if len(parts) != len(self.blocks):
            raise ValidationError("component count must equal block count")
        out = []
        for b, part in zip(self.blocks, parts):
            if isinstance(b, ShiftBlock):
                pairs = _shift_canon(tuple(part))
                for pos, val in pairs:
                    if not 0 <= val < b.group.order:
                        raise ValidationError(f"shift value {val} out of range")
                out.append(pairs)
            elif isinstance(b, LinearBlock):
                vec = tuple(Fraction(x) for x in part)
                if len(vec) != b.dim:
                    raise ValidationError("vector length mismatch")
                out.append(vec)
            else:
                x, y, z = part
                out.append((Fraction(x), Fraction(y), Fraction(z)))
        return GroupElement(tuple(out))

    # -- group operations ----------------------------------------------------

    def multiply(self, x: GroupElement, y: GroupElement) -> GroupElement:
        parts = []
        for b, xp, yp in zip(self.blocks, x.parts, y.parts):
            if isinstance(b, ShiftBlock):
                acc = dict(xp)
                for pos, val in yp:
                    acc[pos] = b.group.op(acc.get(pos, 0), val)
                parts.append(_shift_canon(acc.items()))
            elif isinstance(b, LinearBlock):
                parts.append(tuple(a + c for a, c in zip(xp, yp)))
            else:
                x1, y1, z1 = xp
                x2, y2, z2 = yp
                parts.append((x1 + x2, y1 + y2, z1 + z2 + x1 * y2))
        return GroupElement(tuple(parts))

    def inverse(self, x: GroupElement) -> GroupElement:
        parts = []
        for b, xp in zip(self.blocks, x.parts):
            if isinstance(b, ShiftBlock):
                parts.append(_shift_canon((pos, b.group.inverse(val)) for pos, val in xp))
            elif isinstance(b, LinearBlock):
                parts.append(tuple(-a for a in xp))
            else:
                x1, y1, z1 = xp
                parts.append((-x1, -y1, -z1 + x1 * y1))
        return GroupElement(tuple(parts))

    def power(self, x: GroupElement, n: int) -> GroupElement:
        if n < 0:
            return self.power(self.inverse(x), -n)
        result = self.identity()
        base = x
        while n:
            if n & 1:
                result = self.multiply(result, base)
            base = self.multiply(base, base)
            n >>= 1
        return result

    # -- the automorphism ----------------------------------------------------

    def apply_alpha(self, x: GroupElement) -> GroupElement:
        parts = []
        for b, xp in zip(self.blocks, x.parts):
            if isinstance(b, ShiftBlock):
                parts.append(tuple((pos + 1, val) for pos, val in xp))
            elif isinstance(b, LinearBlock):
                parts.append(linalg.mat_vec(b.matrix, xp))
            else:
                p = Fraction(b.p)
                x1, y1, z1 = xp
                parts.append((p ** b.a * x1, p ** b.b * y1, p ** (b.a + b.b) * z1))
        return GroupElement(tuple(parts))

    def apply_alpha_inverse(self, x: GroupElement) -> GroupElement:
        parts = []
        for b, xp in zip(self.blocks, x.parts):
            if isinstance(b, ShiftBlock):
                parts.append(tuple((pos - 1, val) for pos, val in xp))
            elif isinstance(b, LinearBlock):
                parts.append(linalg.mat_vec(b.inverse, xp))
            else:
                p = Fraction(b.p)
                x1, y1, z1 = xp
                parts.append((x1 / p ** b.a, y1 / p ** b.b, z1 / p ** (b.a + b.b)))
        return GroupElement(tuple(parts))

    # -- torsion and divisibility ---------------------------------------------

    def is_torsion(self, x: GroupElement) -> bool:
        for b, xp in zip(self.blocks, x.parts):
            if isinstance(b, ShiftBlock):
                continue
            if any(c != 0 for c in xp):
                return False
        return True

    def element_order(self, x: GroupElement):
        """Order as a positive integer, or math.inf."""
        if not self.is_torsion(x):
            return INF
        order = 1
        for b, xp in zip(self.blocks, x.parts):
            if isinstance(b, ShiftBlock):
                for _, val in xp:
                    order = math.lcm(order, b.group.element_order(val))
        return order

    def nth_root(self, x: GroupElement, n: int) -> GroupElement:
        """Some y with y^n = x; unique automatically in torsion-free blocks.

        Raises NoRootError when a shift coordinate has no n-th root in F.
        """
        if n < 1:
            raise ValueError("n must be >= 1")
        parts = []
        for b, xp in zip(self.blocks, x.parts):
            if isinstance(b, ShiftBlock):
                pairs = []
                for pos, val in xp:
                    root = _finite_nth_root(b.group, val, n)
                    if root is None:
                        raise NoRootError(
                            f"no {n}-th root of element {val} in {b.group.name or 'F'}"
                        )
                    pairs.append((pos, root))
                parts.append(_shift_canon(pairs))
            elif isinstance(b, LinearBlock):
                parts.append(tuple(c / n for c in xp))
            else:
                x1, y1, z1 = xp
                rx, ry = x1 / n, y1 / n
                rz = (z1 - Fraction(n * (n - 1), 2) * rx * ry) / n
                parts.append((rx, ry, rz))
        return GroupElement(tuple(parts))


def _finite_nth_root(F: FiniteGroup, val: int, n: int):
    for y in range(F.order):
        if F.power(y, n) == val:
            return y
    return None


def heisenberg_power(block: HeisenbergBlock, xp, n: int):
    """Closed power formula (x,y,z)^n = (nx, ny, nz + C(n,2) x y)."""
    x, y, z = xp
    return (n * x, n * y, n * z + Fraction(n * (n - 1), 2) * x * y)


# ---------------------------------------------------------------------------
# standard lattices (level-k compact open subgroups)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StandardLattice:
    """Level-k marker per block: shift components supported on [k, inf);
    linear components with coordinates of valuation >= k in the invariant
    lattice basis; Heisenberg coordinates with valuations >= (ka, kb,
    k(a+b)).  Level k+1 is contained in level k and alpha maps each level
    into the next, so alpha(level k) is always inside level k."""

    group: ContractionGroup
    level: int = 0

    def contains(self, x: GroupElement) -> bool:
        for b, xp in zip(self.group.blocks, x.parts):
            if isinstance(b, ShiftBlock):
                if any(pos < self.level for pos, _ in xp):
                    return False
            elif isinstance(b, LinearBlock):
                coords = linalg.solve(linalg.transpose(b.lattice_basis), xp)
                assert coords is not None
                if any(valuation(c, b.p) < self.level for c in coords):
                    return False
            else:
                x1, y1, z1 = xp
                k = self.level
                if (
                    valuation(x1, b.p) < k * b.a
                    or valuation(y1, b.p) < k * b.b
                    or valuation(z1, b.p) < k * (b.a + b.b)
                ):
                    return False
        return True


def entry_level(G: ContractionGroup, x: GroupElement) -> int:
    """Largest k with x in the level-k lattice (a contraction measure)."""
    level = None

    def upd(v):
        nonlocal level
        level = v if level is None else min(level, v)

    for b, xp in zip(G.blocks, x.parts):
        if isinstance(b, ShiftBlock):
            if xp:
                upd(min(pos for pos, _ in xp))
        elif isinstance(b, LinearBlock):
            coords = linalg.solve(linalg.transpose(b.lattice_basis), xp)
            for c in coords:
                if c != 0:
                    upd(valuation(c, b.p))
        else:
            x1, y1, z1 = xp
            for c, w in ((x1, b.a), (y1, b.b), (z1, b.a + b.b)):
                if c != 0:
                    upd(valuation(c, b.p) // w)
    return 10 ** 9 if level is None else level


# ---------------------------------------------------------------------------
# the scale module Delta_G(alpha^-1)
# ---------------------------------------------------------------------------


def _frac_part(q: Fraction, p: int) -> Fraction:
    """Canonical representative of q mod Z_(p) in [0, 1)."""
    v = valuation(q, p)
    if v >= 0:
        return Fraction(0)
    e = -int(v)
    den_unit = q.denominator // p ** e
    num = q.numerator * pow(den_unit, -1, p ** e) % p ** e
    return Fraction(num, p ** e)


def _shift_index_oracle(F: FiniteGroup) -> int:
    # cosets of F^{>=0} inside F^{>=-1} are keyed by the coordinate at -1
    keys = set()
    for val in range(F.order):
        keys.add(val)
    return len(keys)


def _linear_index_oracle(block: LinearBlock) -> int:
    """[alpha^-1(L) : L] for the invariant lattice L, by Smith reduction."""
    basis = block.lattice_basis
    image = tuple(linalg.mat_vec(block.matrix, v) for v in basis)
    return block.p ** linalg.lattice_index_valuation(basis, image, block.p)


def _heisenberg_index_oracle(block: HeisenbergBlock) -> int:
    """Coset count along the filtration W <= W_z <= W_zy <= alpha^-1(W).

    Each inclusion widens one coordinate; cosets are enumerated and
    deduplicated through the canonical form of the quotient step.
    """
    p, a, b = block.p, block.a, block.b
    total = 1
    # widen z by p^(a+b): coset key is frac(z) (x = y = 0 for candidates)
    keys = {_frac_part(Fraction(k, p ** (a + b)), p) for k in range(p ** (a + b))}
    total *= len(keys)
    # widen y by p^b: the z twist x*v lands inside the already-open z range
    keys = {_frac_part(Fraction(k, p ** b), p) for k in range(p ** b)}
    total *= len(keys)
    # widen x by p^a
    keys = {_frac_part(Fraction(k, p ** a), p) for k in range(p ** a)}
    total *= len(keys)
    return total


def block_module(block: Block) -> int:
    """Delta of alpha^-1 on one block: closed form, asserted against the
    lattice-index oracle at level 0."""
    if isinstance(block, ShiftBlock):
        closed = block.group.order
        oracle = _shift_index_oracle(block.group)
    elif isinstance(block, LinearBlock):
        v = valuation(linalg.det(block.matrix), block.p)
        closed = block.p ** int(v)
        oracle = _linear_index_oracle(block)
    else:
        closed = block.p ** (2 * (block.a + block.b))
        oracle = _heisenberg_index_oracle(block)
    if closed != oracle:
        raise AssertionError(f"module mismatch: closed {closed}, oracle {oracle}")
    return closed


def module_delta(G: ContractionGroup) -> int:
    """Delta_G(alpha^-1): product of the block modules (an integer, and
    >= 2 whenever the group is non-trivial)."""
    out = 1
    for b in G.blocks:
        out *= block_module(b)
    return out


# ---------------------------------------------------------------------------
# random elements (seeded; used by property checks and verify)
# ---------------------------------------------------------------------------


def random_element(G: ContractionGroup, rng, span: int = 3, height: int = 9) -> GroupElement:
    parts = []
    for b in G.blocks:
        if isinstance(b, ShiftBlock):
            pairs = []
            for pos in range(-span, span + 1):
                if rng.random() < 0.4:
                    pairs.append((pos, rng.randrange(b.group.order)))
            parts.append(pairs)
        elif isinstance(b, LinearBlock):
            parts.append([_random_scalar(rng, b.p, height) for _ in range(b.dim)])
        else:
            parts.append([_random_scalar(rng, b.p, height) for _ in range(3)])
    return G.element(parts)


def _random_scalar(rng, p: int, height: int) -> Fraction:
    num = rng.randint(-height, height)
    den = rng.choice([1, 1, 1, p, p * p])
    return Fraction(num, den)
