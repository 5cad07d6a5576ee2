"""Exact p-adic valuation arithmetic on rationals and monic polynomials.

Everything here is computed with exact rationals (``fractions.Fraction``),
which are dense in the p-adic numbers: valuations, Newton polygons and
rational factorizations are exact, while genuinely irrational p-adic factors
only ever appear as Hensel-lifted approximations modulo ``p**precision``.

The factorization entry point is :func:`factor_over_qp`.  It never returns a
bare "irreducible" boolean; every factor carries a :class:`Certification`
explaining how the piece was obtained and whether its irreducibility is
actually certified (pure Newton slope with denominator equal to the degree,
irreducibility mod p after a unit rescaling, or an exhausted exact rational
search at degree <= 4).  ``UNCERTIFIED`` is a legal outcome: finite precision
cannot decide every case.

Polynomials are coefficient tuples, lowest degree first, and serialize in
ASCII as ``X^2 + 3*X + 3``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import NotCoprimeError, NotSquarefreeError

RationalScalar = Fraction

INF = math.inf

DEFAULT_PRECISION = 32

_FACTOR_DEGREE_LIMIT = 8


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid far beyond any prime used here."""
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def valuation(q, p: int):
    """p-adic valuation of a rational: v_p(num) - v_p(den), with v_p(0) = inf."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    q = Fraction(q)
    if q == 0:
        return INF
    v = 0
    n = q.numerator
    while n % p == 0:
        n //= p
        v += 1
    d = q.denominator
    while d % p == 0:
        d //= p
        v -= 1
    return v


@dataclass(frozen=True)
class PAdicContext:
    """Working prime and absolute precision (arithmetic modulo p**precision)."""

    prime: int
    precision: int = DEFAULT_PRECISION

    def __post_init__(self):
        if not is_prime(self.prime):
            raise ValueError(f"{self.prime} is not prime")
        if self.precision < 1:
            raise ValueError("precision must be >= 1")

    @property
    def modulus(self) -> int:
        return self.prime ** self.precision


class Poly:
    """Polynomial with exact rational coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    @staticmethod
    def x_power(k: int) -> "Poly":
        return Poly([0] * k + [1])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def __getitem__(self, i: int) -> Fraction:
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return Fraction(0)

    def __eq__(self, other):
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other: "Poly") -> "Poly":
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly([self[i] + other[i] for i in range(n)])

    def __sub__(self, other: "Poly") -> "Poly":
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly([self[i] - other[i] for i in range(n)])

    def __neg__(self) -> "Poly":
        return Poly([-c for c in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, Poly):
            if self.is_zero or other.is_zero:
                return Poly([])
            out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
            for i, a in enumerate(self.coeffs):
                if a:
                    for j, b in enumerate(other.coeffs):
                        out[i + j] += a * b
            return Poly(out)
        return Poly([c * Fraction(other) for c in self.coeffs])

    __rmul__ = __mul__

    def __divmod__(self, other: "Poly"):
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return Poly([]), self
        quo = [Fraction(0)] * (dq + 1)
        lead = other.coeffs[-1]
        for k in range(dq, -1, -1):
            c = rem[k + other.degree] / lead
            quo[k] = c
            if c:
                for j, b in enumerate(other.coeffs):
                    rem[k + j] -= c * b
        return Poly(quo), Poly(rem[: other.degree])

    def __floordiv__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[0]

    def __mod__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[1]

    def __call__(self, x):
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "Poly":
        return Poly([i * c for i, c in enumerate(self.coeffs)][1:])

    def normalized(self) -> "Poly":
        """Monic scalar multiple (zero polynomial stays zero)."""
        if self.is_zero or self.monic:
            return self
        lead = self.coeffs[-1]
        return Poly([c / lead for c in self.coeffs])

    def reverse(self) -> "Poly":
        return Poly(tuple(reversed(self.coeffs)))

    def __repr__(self):
        return f"Poly({poly_to_str(self)!r})"

    def __str__(self):
        return poly_to_str(self)


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd over the rationals."""
    while not b.is_zero:
        a, b = b, a % b
    return a.normalized()


def squarefree_part(f: Poly) -> Poly:
    """f divided by gcd(f, f'), monic-normalized."""
    g = poly_gcd(f, f.derivative())
    if g.degree == 0:
        return f.normalized()
    return (f // g).normalized()


def squarefree_decomposition(f: Poly) -> list[tuple[Poly, int]]:
    """Yun's algorithm over Q: list of (monic squarefree factor, multiplicity)."""
    f = f.normalized()
    out = []
    d = poly_gcd(f, f.derivative())
    w = f // d
    m = 1
    while w.degree > 0:
        y = poly_gcd(w, d)
        z = w // y
        if z.degree > 0:
            out.append((z.normalized(), m))
        w, d = y, d // y
        m += 1
    return out


def poly_to_str(f: Poly, var: str = "X") -> str:
    """ASCII form: caret powers, explicit '*', e.g. ``X^2 + 3*X + 3``."""
    if f.is_zero:
        return "0"
    parts = []
    for i in range(f.degree, -1, -1):
        c = f[i]
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if i == 0:
            body = str(mag)
        else:
            x = var if i == 1 else f"{var}^{i}"
            body = x if mag == 1 else f"{mag}*{x}"
        if not parts:
            parts.append(body if sign == "+" else f"-{body}")
        else:
            parts.append(f" {sign} {body}")
    return "".join(parts)


def format_valuation(v) -> str:
    return "inf" if v == INF else str(v)


@dataclass(frozen=True)
class NewtonPolygon:
    """Lower convex hull of (i, v_p(a_i)) and the derived root valuations.

    A hull segment of slope -m with horizontal length L contributes L roots
    of valuation m.  A vanishing constant coefficient contributes roots of
    valuation ``inf`` (the polynomial is divisible by X).
    """

    prime: int
    degree: int
    vertices: tuple  # ((index, valuation), ...) valuations are Fractions
    slopes: tuple  # ((slope, multiplicity), ...) hull slopes, ascending

    def root_valuations(self) -> tuple:
        """((valuation, multiplicity), ...) sorted ascending, inf last."""
        vals = [(-s if s != -INF else INF, m) for s, m in self.slopes]
        return tuple(sorted(vals, key=lambda t: (t[0] == INF, t[0])))

    def min_root_valuation(self):
        return self.root_valuations()[0][0]

    def max_root_valuation(self):
        return self.root_valuations()[-1][0]

    def is_pure(self) -> bool:
        return len(self.slopes) == 1

    def total_multiplicity(self) -> int:
        return sum(m for _, m in self.slopes)


def newton_polygon(f: Poly, p: int) -> NewtonPolygon:
    if not f.monic or f.degree < 1:
        raise ValueError("newton_polygon needs a monic polynomial of degree >= 1")
    d = f.degree
    pts = [(i, valuation(f[i], p)) for i in range(d + 1) if f[i] != 0]
    zero_run = pts[0][0]  # number of leading X factors, roots of valuation inf
    # lower convex hull over the finite points, left to right
    hull = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # keep hull lower-convex: drop middle point if not strictly below
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    slopes = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        s = Fraction(y2 - y1, x2 - x1)
        slopes.append((s, x2 - x1))
    if zero_run:
        slopes.insert(0, (-INF, zero_run))
    verts = tuple((i, Fraction(v)) for i, v in hull)
    return NewtonPolygon(prime=p, degree=d, vertices=verts, slopes=tuple(slopes))


def root_valuations(f: Poly, p: int) -> list:
    """Multiset of root valuations as a flat sorted list."""
    out = []
    for v, m in newton_polygon(f, p).root_valuations():
        out.extend([v] * m)
    return out


def is_contractive_poly(f: Poly, p: int) -> bool:
    """True iff every root of f has p-adic absolute value < 1.

    Equivalent, for rational coefficients, to v_p(a_i) >= 1 for all i < deg f.
    """
    if not f.monic:
        raise ValueError("is_contractive_poly needs a monic polynomial")
    if f.degree == 0:
        return True
    return all(v > 0 for v, _ in newton_polygon(f, p).root_valuations())


# ---------------------------------------------------------------------------
# arithmetic on coefficient lists modulo p^k (lowest degree first)
# ---------------------------------------------------------------------------


def _trim(a: list) -> list:
    while a and a[-1] == 0:
        a.pop()
    return a


def _mmul(a, b, m):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % m
    return _trim(out)


def _madd(a, b, m):
    n = max(len(a), len(b))
    out = [((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)) % m for i in range(n)]
    return _trim(out)


def _msub(a, b, m):
    n = max(len(a), len(b))
    out = [((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % m for i in range(n)]
    return _trim(out)


def _mdivmod(a, b, m):
    """Division by b whose leading coefficient is a unit mod m."""
    a = list(a)
    if not b:
        raise ZeroDivisionError
    inv_lead = pow(b[-1], -1, m)
    db = len(b) - 1
    if len(a) - 1 < db:
        return [], _trim(a)
    quo = [0] * (len(a) - db)
    for k in range(len(a) - 1 - db, -1, -1):
        c = a[k + db] * inv_lead % m
        quo[k] = c
        if c:
            for j, y in enumerate(b):
                a[k + j] = (a[k + j] - c * y) % m
    return _trim(quo), _trim(a[:db])


def _fp_gcd(a, b, p):
    a, b = [x % p for x in a], [x % p for x in b]
    a, b = _trim(a), _trim(b)
    while b:
        _, r = _mdivmod(a, b, p)
        a, b = b, r
    if a:
        inv = pow(a[-1], -1, p)
        a = [x * inv % p for x in a]
    return a


def _fp_powmod(base, e: int, mod, p):
    result = [1]
    base = _mdivmod(base, mod, p)[1]
    while e:
        if e & 1:
            result = _mdivmod(_mmul(result, base, p), mod, p)[1]
        base = _mdivmod(_mmul(base, base, p), mod, p)[1]
        e >>= 1
    return result


def _poly_to_residues(f: Poly, m: int, p: int) -> list:
    """Coefficient residues mod m; denominators must be coprime to p."""
    out = []
    for c in f.coeffs:
        if c.denominator % p == 0:
            raise ValueError("coefficient has negative p-adic valuation")
        out.append(c.numerator * pow(c.denominator, -1, m) % m)
    return _trim(out)


def _residues_to_poly(a: Sequence[int], m: int) -> Poly:
    """Symmetric representatives in (-m/2, m/2]."""
    out = []
    for c in a:
        c %= m
        if c > m // 2:
            c -= m
        out.append(c)
    return Poly(out)


# ---------------------------------------------------------------------------
# factorization over F_p (used for coprime splits and mod-p certificates)
# ---------------------------------------------------------------------------


def _fp_is_irreducible(f, p) -> bool:
    """Rabin's deterministic irreducibility test over F_p."""
    f = _trim([c % p for c in f])
    d = len(f) - 1
    if d <= 0:
        return False
    if d == 1:
        return True
    x = [0, 1]
    if _fp_powmod(x, p ** d, f, p) != _mdivmod(x, f, p)[1]:
        return False
    for q in set(_prime_factors(d)):
        h = _msub(_fp_powmod(x, p ** (d // q), f, p), x, p)
        if len(_fp_gcd(h, f, p)) > 1:
            return False
    return True


def _prime_factors(n: int) -> list:
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


def _fp_squarefree_decomposition(f, p):
    """[(squarefree monic, multiplicity)] over F_p, handling p-th powers."""
    f = _trim([c % p for c in f])
    inv = pow(f[-1], -1, p)
    f = [c * inv % p for c in f]
    out = []

    def recurse(g, mult):
        deriv = _trim([(i * c) % p for i, c in enumerate(g)][1:])
        if not deriv:
            # g is a p-th power: g(X) = h(X^p) and h has the same coefficients
            # (Frobenius fixes F_p), so recurse on h with multiplicity * p
            h = g[::p]
            recurse(list(h), mult * p)
            return
        d = _fp_gcd(g, deriv, p)
        w = _mdivmod(g, d, p)[0]
        m = 1
        while len(w) > 1:
            y = _fp_gcd(w, d, p)
            z = _mdivmod(w, y, p)[0]
            if len(z) > 1:
                out.append((z, mult * m))
            w, d = y, _mdivmod(d, y, p)[0]
            m += 1
        if len(d) > 1:
            recurse(d, mult)

    recurse(f, 1)
    return out


def _fp_equal_degree_split(f, k, p, rng):
    """Cantor-Zassenhaus split of a squarefree product of degree-k irreducibles."""
    d = len(f) - 1
    if d == k:
        return [f]
    while True:
        h = [rng.randrange(p) for _ in range(d)]
        h = _trim(h)
        if len(h) <= 1:
            continue
        if p == 2:
            t = list(h)
            acc = list(h)
            for _ in range(k - 1):
                acc = _fp_powmod(acc, 2, f, p)
                t = _madd(t, acc, p)
            g = _fp_gcd(t, f, p)
        else:
            e = (p ** k - 1) // 2
            t = _msub(_fp_powmod(h, e, f, p), [1], p)
            g = _fp_gcd(t, f, p)
        if 0 < len(g) - 1 < d:
            left = _fp_equal_degree_split(g, k, p, rng)
            right = _fp_equal_degree_split(_mdivmod(f, g, p)[0], k, p, rng)
            return left + right


def fp_factor(f: Sequence[int], p: int) -> list:
    """Full factorization over F_p: [(monic irreducible, multiplicity)].

    Randomized equal-degree splitting runs on a PRNG seeded from the input,
    so the result is deterministic.
    """
    f = _trim([c % p for c in f])
    if len(f) <= 1:
        return []
    rng = random.Random((p, tuple(f)).__hash__())
    out = []
    for g, mult in _fp_squarefree_decomposition(list(f), p):
        # distinct-degree decomposition of the squarefree piece
        k = 1
        rest = list(g)
        x = [0, 1]
        while len(rest) - 1 >= 2 * k:
            h = _msub(_fp_powmod(x, p ** k, rest, p), x, p)
            same = _fp_gcd(h, rest, p)
            if len(same) > 1:
                for irr in _fp_equal_degree_split(same, k, p, rng):
                    out.append((irr, mult))
                rest = _mdivmod(rest, same, p)[0]
            k += 1
        if len(rest) > 1:
            out.append((rest, mult))
    out.sort(key=lambda t: (len(t[0]), t[0]))
    return out


# ---------------------------------------------------------------------------
# Hensel lifting
# ---------------------------------------------------------------------------


def hensel_lift(f: Poly, g0: Poly, h0: Poly, p: int, k: int) -> tuple:
    """Lift a coprime factorization f = g0*h0 (mod p) to modulus p**k.

    All three polynomials must be monic with p-integral coefficients and
    deg g0 + deg h0 = deg f.  Raises :class:`NotCoprimeError` when the
    resultant of g0 and h0 vanishes mod p (gcd test), because the split then
    cannot be lifted.  Returns monic (g, h) with f = g*h (mod p**k),
    g = g0 and h = h0 (mod p), coefficients as symmetric representatives.
    """
    if not (f.monic and g0.monic and h0.monic):
        raise ValueError("hensel_lift needs monic polynomials")
    if g0.degree + h0.degree != f.degree:
        raise ValueError("degree mismatch in hensel_lift")
    if k < 1:
        raise ValueError("target exponent must be >= 1")
    fm = _poly_to_residues(f, p ** k, p)
    g = _poly_to_residues(g0, p, p)
    h = _poly_to_residues(h0, p, p)
    if _msub(_mmul(g, h, p), fm, p):
        raise ValueError("f != g0*h0 (mod p)")
    if len(_fp_gcd(g, h, p)) != 1:
        raise NotCoprimeError("g0 and h0 share a factor mod p")
    # Bezout: a*g + b*h = 1 (mod p), by the extended Euclidean algorithm
    a, b = _fp_bezout(g, h, p)
    m = p
    while m < p ** k:
        m2 = min(m * m, p ** k)
        e = _msub(fm, _mmul(g, h, m2), m2)
        # solve g*v + h*u = e with deg u < deg g
        q, u = _mdivmod(_mmul(b, e, m2), g, m2)
        v = _madd(_mmul(a, e, m2), _mmul(h, q, m2), m2)
        g = _madd(g, u, m2)
        h = _madd(h, v, m2)
        # refresh the Bezout pair to the new modulus
        delta = _msub(_madd(_mmul(a, g, m2), _mmul(b, h, m2), m2), [1], m2)
        a = _msub(a, _mmul(a, delta, m2), m2)
        b = _msub(b, _mmul(b, delta, m2), m2)
        q2, a = _mdivmod(a, h, m2)
        b = _madd(b, _mmul(q2, g, m2), m2)
        m = m2
    mod = p ** k
    g_out = _residues_to_poly(g, mod)
    h_out = _residues_to_poly(h, mod)
    return g_out, h_out


def _fp_bezout(g, h, p):
    """(a, b) with a*g + b*h = 1 over F_p; inputs must be coprime."""
    r0, r1 = list(g), list(h)
    s0, s1 = [1], []
    t0, t1 = [], [1]
    while r1:
        q, r = _mdivmod(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, _msub(s0, _mmul(q, s1, p), p)
        t0, t1 = t1, _msub(t0, _mmul(q, t1, p), p)
    inv = pow(r0[0], -1, p)
    a = [c * inv % p for c in s0]
    b = [c * inv % p for c in t0]
    return a, b


# ---------------------------------------------------------------------------
# certified factorization over Q_p
# ---------------------------------------------------------------------------


class Certification(Enum):
    RATIONAL_EXACT = "RationalExact"
    NEWTON_SLOPE = "NewtonSlope"
    HENSEL_COPRIME = "HenselCoprime"
    UNCERTIFIED = "Uncertified"


@dataclass(frozen=True)
class Factor:
    """One monic piece of a factorization over Q_p.

    ``precision`` is None for exact rational coefficients, otherwise the
    coefficients are representatives modulo p**precision.  ``irreducible``
    is True only when backed by the certificate named in ``certification``.
    """

    poly: Poly
    certification: Certification
    irreducible: bool
    precision: int | None = None

    @property
    def exact(self) -> bool:
        return self.precision is None

    def __str__(self):
        tag = self.certification.value
        if not self.irreducible:
            tag += ",unresolved"
        return f"({poly_to_str(self.poly)} [{tag}])"


@dataclass(frozen=True)
class CertifiedFactorization:
    """Factors of a monic squarefree polynomial, product congruent mod p^N."""

    input: Poly
    context: PAdicContext
    factors: tuple

    def degrees_sum(self) -> int:
        return sum(f.poly.degree for f in self.factors)

    def fully_certified(self) -> bool:
        return all(f.irreducible for f in self.factors)

    def product_congruent(self) -> bool:
        """Exact check that the factor product is f modulo p**precision."""
        prod = Poly([1])
        for f in self.factors:
            prod = prod * f.poly
        diff = prod - self.input
        k = self.context.precision
        return all(valuation(c, self.context.prime) >= k for c in diff.coeffs)


def _rational_roots(f: Poly) -> list:
    """All rational roots of a monic rational polynomial, with multiplicity 1+
    occurrences stripped by the caller."""
    # scale to a monic integer polynomial g(Y) = L^d f(Y/L)
    L = 1
    for c in f.coeffs:
        L = L * c.denominator // math.gcd(L, c.denominator)
    d = f.degree
    g = [int(f[i] * L ** (d - i)) for i in range(d + 1)]
    c0 = g[0]
    if c0 == 0:
        return [Fraction(0)] + _rational_roots((f // Poly([0, 1])).normalized())
    roots = []
    for r in _divisors(abs(c0)):
        for cand in (r, -r):
            if f(Fraction(cand, L)) == 0:
                roots.append(Fraction(cand, L))
    return sorted(set(roots))


def _divisors(n: int) -> list:
    """All positive divisors; gives up (partial list) past a work bound."""
    if n == 0:
        return []
    small = []
    d = 1
    while d * d <= n and d <= 10 ** 6:
        if n % d == 0:
            small.append(d)
        d += 1
    out = set(small)
    for d in small:
        out.add(n // d)
    return sorted(out)


def _rational_split(f: Poly) -> list | None:
    """Split f into monic rational factors, or None if f has none.

    Complete for degree <= 4 (root search plus quadratic-pair search); for
    larger degrees only rational roots are stripped, which is all the
    brute-force search promises.
    """
    d = f.degree
    if d <= 1:
        return None
    roots = _rational_roots(f)
    if roots:
        rest = f
        out = []
        for r in roots:
            lin = Poly([-r, 1])
            while (rest % lin).is_zero:
                out.append(lin)
                rest = (rest // lin).normalized()
        if rest.degree > 0:
            out.append(rest)
        return out if len(out) > 1 else None
    if d == 4:
        pair = _quartic_quadratic_split(f)
        if pair:
            return list(pair)
    return None


def _quartic_quadratic_split(f: Poly):
    """Monic quartic as a product of two monic rational quadratics, if any."""
    # scale to integer coefficients; by Gauss the quadratic factors of the
    # scaled polynomial are integral, so divisor enumeration is complete
    L = 1
    for c in f.coeffs:
        L = L * c.denominator // math.gcd(L, c.denominator)
    e = [int(f[i] * L ** (4 - i)) for i in range(5)]  # g(Y) = Y^4+e3 Y^3+...
    e4, e3, e2, e1, e0 = e[4], e[3], e[2], e[1], e[0]
    assert e4 == 1
    if e0 == 0:
        return None
    for b in _divisors(abs(e0)):
        for b_signed in (b, -b):
            if e0 % b_signed != 0:
                continue
            dd = e0 // b_signed
            # a + c = e3, ac = e2 - b - d, ad + bc = e1
            s = e3
            prod = e2 - b_signed - dd
            disc = s * s - 4 * prod
            if disc < 0:
                continue
            r = math.isqrt(disc)
            if r * r != disc:
                continue
            for a2 in ((s + r), (s - r)):
                if a2 % 2 != 0:
                    continue
                a = a2 // 2
                c = s - a
                if a * dd + b_signed * c == e1:
                    g = Poly([Fraction(b_signed, L * L), Fraction(a, L), 1])
                    h = Poly([Fraction(dd, L * L), Fraction(c, L), 1])
                    if (f - g * h).is_zero:
                        return g, h
    return None


def _substitute_scale(f: Poly, p: int, m: int) -> Poly:
    """b(Y) = f(p^m Y) / p^(m*deg f): shifts every root valuation down by m."""
    d = f.degree
    return Poly([f[i] * Fraction(p) ** (m * (i - d)) for i in range(d + 1)])


def _unscale_factor(g: Poly, p: int, m: int) -> Poly:
    """Inverse of :func:`_substitute_scale` on a monic factor of b."""
    k = g.degree
    return Poly([g[i] * Fraction(p) ** (m * (k - i)) for i in range(k + 1)])


class _Piece:
    __slots__ = ("poly", "exact", "via")

    def __init__(self, poly, exact, via):
        self.poly = poly
        self.exact = exact  # coefficients are true values, not residues
        self.via = via  # certification of the split that produced the piece


def factor_over_qp(f: Poly, ctx: PAdicContext) -> CertifiedFactorization:
    """Certified factorization of a monic squarefree polynomial over Q_p.

    Pipeline per piece: exact rational factorization (complete at degree
    <= 4), Newton-slope splitting at integral extreme slopes, mod-p coprime
    splits lifted by Hensel after rescaling to a unit polynomial.  Pieces
    that admit no certified split are marked irreducible only when a
    certificate applies; otherwise they are tagged Uncertified.
    """
    if not f.monic or f.degree < 1:
        raise ValueError("factor_over_qp needs a monic polynomial of degree >= 1")
    if f.degree > _FACTOR_DEGREE_LIMIT:
        raise ValueError(f"degree {f.degree} exceeds the supported bound {_FACTOR_DEGREE_LIMIT}")
    if poly_gcd(f, f.derivative()).degree != 0:
        raise NotSquarefreeError("gcd(f, f') != 1; split off the squarefree part first")
    p = ctx.prime
    # lift with head-room so back-substitutions stay valid mod p^precision
    work_prec = ctx.precision + 2 * f.degree * _max_abs_slope(f, p) + 4
    done: list[Factor] = []
    queue = [_Piece(f, True, Certification.RATIONAL_EXACT)]
    while queue:
        piece = queue.pop()
        g = piece.poly
        if g.degree == 1:
            done.append(
                Factor(
                    poly=g,
                    certification=piece.via if not piece.exact else Certification.RATIONAL_EXACT,
                    irreducible=True,
                    precision=None if piece.exact else ctx.precision,
                )
            )
            continue
        if piece.exact:
            split = _rational_split(g)
            if split:
                for part in split:
                    queue.append(_Piece(part, True, Certification.RATIONAL_EXACT))
                continue
        handled = _padic_step(g, piece, p, work_prec, ctx, queue, done)
        if not handled:
            done.append(
                Factor(
                    poly=g,
                    certification=Certification.UNCERTIFIED,
                    irreducible=False,
                    precision=None if piece.exact else ctx.precision,
                )
            )
    done = [
        fa
        if fa.precision is None
        else Factor(
            poly=_canonical_mod(fa.poly, p, ctx.precision),
            certification=fa.certification,
            irreducible=fa.irreducible,
            precision=ctx.precision,
        )
        for fa in done
    ]
    done.sort(key=lambda fa: (fa.poly.degree, fa.poly.coeffs))
    return CertifiedFactorization(input=f, context=ctx, factors=tuple(done))


def _canonical_mod(f: Poly, p: int, k: int) -> Poly:
    """Symmetric canonical representatives mod p**k for p-integral coefficients."""
    mod = p ** k
    out = []
    for c in f.coeffs:
        if c.denominator % p == 0:
            out.append(c)
        else:
            r = c.numerator * pow(c.denominator, -1, mod) % mod
            if r > mod // 2:
                r -= mod
            out.append(Fraction(r))
    return Poly(out)


def _max_abs_slope(f: Poly, p: int) -> int:
    worst = 1
    for v, _ in newton_polygon(f, p).root_valuations():
        if v != INF:
            worst = max(worst, abs(math.ceil(v)), abs(math.floor(v)))
    return worst


def _padic_step(g: Poly, piece: _Piece, p: int, work_prec: int, ctx, queue, done) -> bool:
    """Try one slope or mod-p split on g; True when g was consumed."""
    npg = newton_polygon(g, p)
    vals = npg.root_valuations()
    if vals[0][0] == INF:  # X divides g; squarefree input makes it a single X
        queue.append(_Piece(Poly([0, 1]), piece.exact, piece.via))
        queue.append(_Piece((g // Poly([0, 1])).normalized(), piece.exact, piece.via))
        return True
    if npg.is_pure():
        m = vals[0][0]
        if m.denominator == npg.degree and npg.degree == npg.total_multiplicity():
            # pure slope with denominator equal to the degree (Eisenstein-like)
            done.append(
                Factor(
                    poly=g,
                    certification=Certification.NEWTON_SLOPE,
                    irreducible=True,
                    precision=None if piece.exact else ctx.precision,
                )
            )
            return True
        if m.denominator == 1:
            return _unit_part_split(g, int(m), piece, p, work_prec, ctx, queue, done)
        return False
    # several slopes: split off an integral extreme slope if one exists
    m_min = vals[0][0]
    m_max = vals[-1][0]
    if m_min.denominator == 1:
        return _slope_split(g, int(m_min), piece, p, work_prec, queue)
    if m_max != INF and m_max.denominator == 1:
        rev = _reciprocal(g)
        if rev is None:
            return False
        ok = _slope_split(rev, -int(m_max), piece, p, work_prec, queue, reciprocal=True)
        return ok
    return False


def _reciprocal(g: Poly) -> Poly | None:
    a0 = g[0]
    if a0 == 0:
        return None
    return Poly([g[g.degree - i] / a0 for i in range(g.degree + 1)])


def _slope_split(g: Poly, m: int, piece, p: int, work_prec: int, queue, reciprocal=False) -> bool:
    """Split g at its minimal root valuation m (an integer)."""
    b = _substitute_scale(g, p, m)
    mod = p ** work_prec
    try:
        bres = _poly_to_residues(b, mod, p)
    except ValueError:
        return False
    bbar = [c % p for c in bres]
    i0 = next((i for i, c in enumerate(bbar) if c), None)
    if i0 is None or i0 == 0:
        return False
    unit = _trim(list(bbar[i0:]))
    g0 = Poly([0] * i0 + [1])
    h0 = _residues_to_poly(unit, p)
    try:
        gl, hl = hensel_lift(_residues_to_poly(bres, mod), g0, h0, p, work_prec)
    except NotCoprimeError:
        return False
    for part in (gl, hl):
        back = _unscale_factor(part, p, m)
        if reciprocal:
            rec = _reciprocal(back)
            if rec is None:
                return False
            back = rec
        queue.append(_Piece(back, False, Certification.NEWTON_SLOPE))
    return True


def _unit_part_split(g: Poly, m: int, piece, p: int, work_prec: int, ctx, queue, done) -> bool:
    """g has pure integral slope m: rescale to a unit polynomial and use
    its factorization mod p for coprime Hensel splits or a certificate."""
    b = _substitute_scale(g, p, m)
    mod = p ** work_prec
    try:
        bres = _poly_to_residues(b, mod, p)
    except ValueError:
        return False
    bbar = [c % p for c in bres]
    facs = fp_factor(bbar, p)
    if len(facs) == 1:
        irr, mult = facs[0]
        if mult == 1:
            # unit polynomial irreducible mod p: irreducible over Q_p
            done.append(
                Factor(
                    poly=g,
                    certification=Certification.HENSEL_COPRIME,
                    irreducible=True,
                    precision=None if piece.exact else ctx.precision,
                )
            )
            return True
        return False
    # at least two coprime parts: lift the first against the rest
    first, mult = facs[0]
    g0_res = [1]
    for _ in range(mult):
        g0_res = _mmul(g0_res, first, p)
    g0 = _residues_to_poly(g0_res, p)
    h0_res, rem = _mdivmod(bbar, g0_res, p)
    assert not rem
    h0 = _residues_to_poly(h0_res, p)
    try:
        gl, hl = hensel_lift(_residues_to_poly(bres, mod), g0, h0, p, work_prec)
    except NotCoprimeError:
        return False
    for part in (gl, hl):
        queue.append(_Piece(_unscale_factor(part, p, m), False, Certification.HENSEL_COPRIME))
    return True


# ---------------------------------------------------------------------------
# residue helpers used for factor comparison at working precision
# ---------------------------------------------------------------------------


def coefficient_residues(f: Poly, p: int, k: int) -> tuple:
    """Canonical residues of the coefficients mod p**k (p-integral input)."""
    mod = p ** k
    return tuple(_poly_to_residues(f, mod, p) + [0] * 0) or (0,)


def polys_congruent(f: Poly, g: Poly, p: int, k: int) -> bool:
    diff = f - g
    return all(valuation(c, p) >= k for c in diff.coeffs)
