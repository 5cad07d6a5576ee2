"""Exact rational matrix and lattice helpers.

Matrices are tuples of row tuples of Fractions.  The lattice routines work
over the localization Z_(p) (rationals with denominator prime to p), which is
a discrete valuation ring, so Hermite and Smith reduction only ever divide by
units or powers of p and stay exact.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .padic import INF, Poly, valuation

Vec = tuple
Mat = tuple


def to_matrix(rows) -> Mat:
    out = tuple(tuple(Fraction(c) for c in row) for row in rows)
    if out and any(len(r) != len(out[0]) for r in out):
        raise ValueError("ragged matrix")
    return out


def identity_matrix(d: int) -> Mat:
    return tuple(tuple(Fraction(1 if i == j else 0) for j in range(d)) for i in range(d))


def mat_mul(a: Mat, b: Mat) -> Mat:
    n, k, m = len(a), len(b), len(b[0])
    return tuple(
        tuple(sum((a[i][t] * b[t][j] for t in range(k)), Fraction(0)) for j in range(m))
        for i in range(n)
    )


def mat_vec(a: Mat, v: Vec) -> Vec:
    return tuple(sum((a[i][j] * v[j] for j in range(len(v))), Fraction(0)) for i in range(len(a)))


def mat_scale(a: Mat, c) -> Mat:
    c = Fraction(c)
    return tuple(tuple(x * c for x in row) for row in a)


def mat_add(a: Mat, b: Mat) -> Mat:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def transpose(a: Mat) -> Mat:
    return tuple(zip(*a))


def mat_pow(a: Mat, n: int) -> Mat:
    result = identity_matrix(len(a))
    base = a
    while n:
        if n & 1:
            result = mat_mul(result, base)
        base = mat_mul(base, base)
        n >>= 1
    return result


def det(a: Mat) -> Fraction:
    n = len(a)
    m = [list(row) for row in a]
    out = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            out = -out
        out *= m[col][col]
        inv = 1 / m[col][col]
        for r in range(col + 1, n):
            if m[r][col]:
                f = m[r][col] * inv
                for c in range(col, n):
                    m[r][c] -= f * m[col][c]
    return out


def mat_inv(a: Mat) -> Mat:
    n = len(a)
    m = [list(row) + [Fraction(1 if i == j else 0) for j in range(n)] for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for r in range(n):
            if r != col and m[r][col]:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return tuple(tuple(row[n:]) for row in m)


def char_poly(a: Mat) -> Poly:
    """det(X*I - A) by the Faddeev-LeVerrier recursion, exact over Q."""
    n = len(a)
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    m = identity_matrix(n)
    for k in range(1, n + 1):
        am = mat_mul(a, m)
        tr = sum((am[i][i] for i in range(n)), Fraction(0))
        c = -tr / k
        coeffs[n - k] = c
        m = tuple(
            tuple(am[i][j] + (c if i == j else 0) for j in range(n)) for i in range(n)
        )
    return Poly(coeffs)


def companion_matrix(f: Poly) -> Mat:
    """Matrix sending e_j to e_(j+1), last column from the coefficients of f:
    columns are the images of the basis, so char poly equals f."""
    if not f.monic or f.degree < 1:
        raise ValueError("companion matrix needs a monic polynomial of degree >= 1")
    d = f.degree
    rows = [[Fraction(0)] * d for _ in range(d)]
    for j in range(d - 1):
        rows[j + 1][j] = Fraction(1)
    for i in range(d):
        rows[i][d - 1] = -f[i]
    return tuple(tuple(r) for r in rows)


# ---------------------------------------------------------------------------
# rational subspaces (row spans in canonical reduced echelon form)
# ---------------------------------------------------------------------------


def rref(rows) -> tuple:
    """Reduced row echelon form; returns (rows without zero rows, pivots)."""
    m = [list(map(Fraction, r)) for r in rows]
    if not m:
        return (), ()
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    out = tuple(tuple(row) for row in m[:r])
    return out, tuple(pivots)


def span_basis(vectors) -> tuple:
    """Canonical basis (RREF rows) of the span of the given vectors."""
    vecs = [v for v in vectors if any(x != 0 for x in v)]
    return rref(vecs)[0]


def subspace_dim(basis) -> int:
    return len(basis)


def subspace_contains(basis, v) -> bool:
    if all(x == 0 for x in v):
        return True
    combined = span_basis(list(basis) + [tuple(v)])
    return len(combined) == len(basis)


def subspace_le(a, b) -> bool:
    """span(a) contained in span(b)."""
    return all(subspace_contains(b, v) for v in a)


def subspace_sum(a, b) -> tuple:
    return span_basis(list(a) + list(b))


def nullspace(a: Mat) -> tuple:
    """Canonical basis of the right kernel of a."""
    if not a:
        return ()
    red, pivots = rref(a)
    ncols = len(a[0])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][fc]
        basis.append(tuple(v))
    return span_basis(basis)


def solve(a: Mat, v: Vec) -> Vec | None:
    """One solution x of a x = v, or None."""
    n = len(a)
    ncols = len(a[0])
    aug = [list(a[i]) + [Fraction(v[i])] for i in range(n)]
    red, pivots = rref(aug)
    x = [Fraction(0)] * ncols
    for r, pc in enumerate(pivots):
        if pc == ncols:
            return None
        x[pc] = red[r][ncols]
    return tuple(x)


# ---------------------------------------------------------------------------
# Z_(p) lattices: Hermite-style column reduction, Smith form, indices
# ---------------------------------------------------------------------------


def _vp(x: Fraction, p: int):
    return valuation(x, p)


def zp_column_basis(columns, p: int) -> tuple:
    """Z_(p)-basis of the span of the given column vectors, in echelon form.

    Column operations over Z_(p) only: unit scaling and adding a Z_(p)
    multiple of one column to another (pivot chosen with minimal valuation).
    """
    cols = [list(map(Fraction, c)) for c in columns]
    cols = [c for c in cols if any(x != 0 for x in c)]
    if not cols:
        return ()
    nrows = len(cols[0])
    basis = []
    row = 0
    while cols and row < nrows:
        cands = [(ci, _vp(c[row], p)) for ci, c in enumerate(cols) if c[row] != 0]
        if not cands:
            row += 1
            continue
        ci, vmin = min(cands, key=lambda t: t[1])
        piv = cols.pop(ci)
        # scale the pivot entry to exactly p^vmin (multiply by a unit)
        unit = piv[row] / Fraction(p) ** vmin
        piv = [x / unit for x in piv]
        for c in cols:
            if c[row] != 0:
                q = c[row] / piv[row]  # valuation >= 0 by pivot minimality
                for i in range(nrows):
                    c[i] -= q * piv[i]
        basis.append(tuple(piv))
        cols = [c for c in cols if any(x != 0 for x in c)]
        row += 1
    return tuple(basis)


def zp_span_contains(basis, v, p: int) -> bool:
    """Is v in the Z_(p)-span of the basis columns?"""
    if all(x == 0 for x in v):
        return True
    if not basis:
        return False
    mat = transpose(tuple(basis))
    x = solve(mat, tuple(v))
    if x is None:
        return False
    return all(_vp(c, p) >= 0 for c in x)


def zp_span_equal(a, b, p: int) -> bool:
    return all(zp_span_contains(b, v, p) for v in a) and all(
        zp_span_contains(a, v, p) for v in b
    )


def smith_valuations(a: Mat, p: int) -> list:
    """Valuations of the elementary divisors of a over Z_(p), ascending.

    Entries must lie in Z_(p).  Standard DVR reduction: move a minimal
    valuation entry to the pivot, clear its row and column, recurse.
    """
    m = [list(row) for row in a]
    out = []
    top = 0
    while top < len(m) and top < len(m[0]):
        best = None
        for i in range(top, len(m)):
            for j in range(top, len(m[0])):
                if m[i][j] != 0:
                    v = _vp(m[i][j], p)
                    if best is None or v < best[0]:
                        best = (v, i, j)
        if best is None:
            break
        v, bi, bj = best
        m[top], m[bi] = m[bi], m[top]
        for row in m:
            row[top], row[bj] = row[bj], row[top]
        piv = m[top][top]
        for i in range(top + 1, len(m)):
            if m[i][top]:
                f = m[i][top] / piv
                for j in range(top, len(m[0])):
                    m[i][j] -= f * m[top][j]
        for j in range(top + 1, len(m[0])):
            if m[top][j]:
                f = m[top][j] / piv
                for i in range(top, len(m)):
                    m[i][j] -= f * m[i][top]
        out.append(v)
        top += 1
    return sorted(out)


def lattice_index_valuation(big_basis, sub_basis, p: int) -> int:
    """v_p of the index [big : sub] for Z_(p)-lattices sub <= big of equal rank."""
    if len(big_basis) != len(sub_basis):
        raise ValueError("lattices must have equal rank")
    if not big_basis:
        return 0
    mat = transpose(tuple(big_basis))
    coords = []
    for v in sub_basis:
        x = solve(mat, tuple(v))
        if x is None or any(_vp(c, p) < 0 for c in x):
            raise ValueError("not a sublattice")
        coords.append(x)
    return sum(smith_valuations(transpose(tuple(coords)), p))


def invariant_lattice(a: Mat, p: int):
    """Z_(p)-lattice basis L with Z^d <= L and A L <= L, or None.

    L is the span of the columns of I, A, ..., stabilized.  Failure to
    stabilize within deg+1 steps certifies an eigenvalue of valuation < 0
    (the minimal polynomial is then not p-integral), so None is returned.
    """
    d = len(a)
    cols = list(transpose(identity_matrix(d)))
    basis = zp_column_basis(cols, p)
    frontier = cols
    for _ in range(d + 1):
        frontier = [mat_vec(a, v) for v in frontier]
        new_basis = zp_column_basis(list(basis) + frontier, p)
        if len(new_basis) == len(basis) and zp_span_equal(new_basis, basis, p):
            return basis
        basis = new_basis
    return None


def min_entry_valuation(a: Mat, p: int):
    worst = INF
    for row in a:
        for x in row:
            if x != 0:
                v = _vp(x, p)
                if v < worst:
                    worst = v
    return worst


def kernel_mod_pk(m_int, p: int, t: int) -> list:
    """Basis of {v : M v = 0 mod p**t} complementary to the pivot columns.

    Entries of m_int must be integers.  Smith-style reduction over Z/p^t with
    the column transform tracked; pivots are only taken at valuation < t, so
    the returned columns v satisfy M v = 0 mod p**t exactly.  Vectors come
    back as integer tuples with symmetric representatives.
    """
    mod = p ** t
    m = [[x % mod for x in row] for row in m_int]
    nrows = len(m)
    ncols = len(m[0]) if m else 0
    v = [[1 if i == j else 0 for j in range(ncols)] for i in range(ncols)]

    def val(x):
        if x % mod == 0:
            return t
        out = 0
        while x % p == 0:
            x //= p
            out += 1
        return out

    top = 0
    while top < min(nrows, ncols):
        best = None
        for i in range(top, nrows):
            for j in range(top, ncols):
                w = val(m[i][j])
                if w < t and (best is None or w < best[0]):
                    best = (w, i, j)
        if best is None:
            break
        w, bi, bj = best
        m[top], m[bi] = m[bi], m[top]
        for row in m:
            row[top], row[bj] = row[bj], row[top]
        for row in v:
            row[top], row[bj] = row[bj], row[top]
        piv = m[top][top]
        unit = piv // p ** w
        inv_unit = pow(unit, -1, mod)
        for i in range(nrows):
            m[i][top] = m[i][top] * inv_unit % mod
        for c in range(ncols):
            v[c][top] = v[c][top] * inv_unit % mod
        piv = m[top][top]  # now exactly p^w mod p^t
        for i in range(top + 1, nrows):
            if m[i][top]:
                q = (m[i][top] // p ** w) % mod
                for j in range(top, ncols):
                    m[i][j] = (m[i][j] - q * m[top][j]) % mod
        for j in range(top + 1, ncols):
            if m[top][j]:
                q = (m[top][j] // p ** w) % mod
                for i in range(nrows):
                    m[i][j] = (m[i][j] - q * m[i][top]) % mod
                for i in range(ncols):
                    v[i][j] = (v[i][j] - q * v[i][top]) % mod
        top += 1
    out = []
    for j in range(top, ncols):
        col = []
        for i in range(ncols):
            x = v[i][j] % mod
            if x > mod // 2:
                x -= mod
            col.append(x)
        out.append(tuple(col))
    return out
