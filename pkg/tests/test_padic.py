import math
import random
from fractions import Fraction

import pytest

from contractio.errors import NotCoprimeError, NotSquarefreeError
from contractio.padic import (
    Certification,
    INF,
    PAdicContext,
    Poly,
    factor_over_qp,
    fp_factor,
    hensel_lift,
    is_contractive_poly,
    newton_polygon,
    poly_to_str,
    polys_congruent,
    root_valuations,
    squarefree_decomposition,
    squarefree_part,
    valuation,
)


def test_valuation_examples():
    assert valuation(18, 3) == 2
    assert valuation(Fraction(1, 3), 3) == -1
    assert valuation(0, 5) == INF
    assert valuation(Fraction(9, 5), 3) == 2
    assert valuation(Fraction(5, 9), 3) == -2


def test_valuation_is_additive():
    rng = random.Random(5)
    for _ in range(200):
        p = rng.choice((2, 3, 5, 7))
        a = Fraction(rng.randint(1, 500), rng.randint(1, 500))
        b = Fraction(rng.randint(1, 500), rng.randint(1, 500))
        assert valuation(a * b, p) == valuation(a, p) + valuation(b, p)


def test_newton_polygon_spec_examples():
    assert root_valuations(Poly([3, 3, 1]), 3) == [Fraction(1, 2), Fraction(1, 2)]
    assert root_valuations(Poly([3, 1, 1]), 3) == [Fraction(0), Fraction(1)]
    assert root_valuations(Poly([-3, 1]), 3) == [Fraction(1)]


def test_newton_polygon_multiplicities_sum_to_degree():
    rng = random.Random(7)
    for _ in range(300):
        p = rng.choice((2, 3, 5, 7))
        d = rng.randint(1, 6)
        coeffs = [Fraction(rng.randint(-50, 50)) for _ in range(d)] + [Fraction(1)]
        f = Poly(coeffs)
        if f.degree < 1:
            continue
        np_ = newton_polygon(f, p)
        assert np_.total_multiplicity() == f.degree


def test_zero_constant_coefficient_gives_infinite_valuations():
    f = Poly([0, 0, 2, 1])  # X^2 (X + 2)
    vals = root_valuations(f, 2)
    assert vals.count(INF) == 2 and Fraction(1) in vals


def test_contractive_spec_examples():
    assert is_contractive_poly(Poly([-3, 1]), 3) is True
    assert is_contractive_poly(Poly([-1, 1]), 3) is False
    assert is_contractive_poly(Poly([2, 0, 1]), 2) is True


def test_contractive_three_way_agreement():
    # polygon criterion == min-valuation criterion == coefficient criterion
    rng = random.Random(11)
    for _ in range(400):
        p = rng.choice((2, 3, 5))
        d = rng.randint(1, 5)
        f = Poly([Fraction(rng.randint(-40, 40)) for _ in range(d)] + [Fraction(1)])
        if f.degree < 1:
            continue
        by_polygon = is_contractive_poly(f, p)
        vals = root_valuations(f, p)
        by_minval = min(vals) > 0 and (
            min(v for v in vals if v != INF) >= Fraction(1, f.degree)
            if any(v != INF for v in vals)
            else True
        )
        by_coeffs = all(valuation(f[i], p) >= 1 for i in range(f.degree))
        assert by_polygon == by_minval == by_coeffs


def test_hensel_exact_split_is_its_own_lift():
    g, h = hensel_lift(Poly([-1, 0, 1]), Poly([-1, 1]), Poly([1, 1]), 3, 4)
    assert {g, h} == {Poly([-1, 1]), Poly([1, 1])}


def test_hensel_quadratic_iteration_and_congruence():
    f = Poly([3, 1, 1])
    g, h = hensel_lift(f, Poly([0, 1]), Poly([1, 1]), 3, 4)
    diff = f - g * h
    assert all(valuation(c, 3) >= 4 for c in diff.coeffs)
    assert all(valuation(c, 3) >= 1 for c in (g - Poly([0, 1])).coeffs)
    assert all(valuation(c, 3) >= 1 for c in (h - Poly([1, 1])).coeffs)


def test_hensel_not_coprime():
    with pytest.raises(NotCoprimeError):
        hensel_lift(Poly([3, 0, 1]), Poly([0, 1]), Poly([0, 1]), 3, 4)


def test_hensel_random_splits_exact_mod_p32():
    rng = random.Random(13)
    for _ in range(60):
        p = rng.choice((2, 3, 5, 7))
        dg = rng.randint(1, 3)
        dh = rng.randint(1, 3)
        g0 = Poly([rng.randrange(p) for _ in range(dg)] + [1])
        h0 = Poly([rng.randrange(p) for _ in range(dh)] + [1])
        from contractio.padic import _fp_gcd, _poly_to_residues

        if len(_fp_gcd(_poly_to_residues(g0, p, p), _poly_to_residues(h0, p, p), p)) != 1:
            continue
        noise = Poly([rng.randint(-5, 5) for _ in range(dg + dh)])
        f = g0 * h0 + noise * p
        g, h = hensel_lift(f, g0, h0, p, 32)
        diff = f - g * h
        assert all(valuation(c, p) >= 32 for c in diff.coeffs)


def test_fp_factor_reassembles():
    rng = random.Random(17)
    for _ in range(100):
        p = rng.choice((2, 3, 5, 7, 11))
        d = rng.randint(1, 6)
        f = [rng.randrange(p) for _ in range(d)] + [1]
        factors = fp_factor(f, p)
        prod = [1]
        from contractio.padic import _mmul

        for poly, mult in factors:
            for _ in range(mult):
                prod = _mmul(prod, poly, p)
        assert prod == [c % p for c in f]


def test_factor_rational_roots():
    fact = factor_over_qp(Poly([2, -3, 1]), PAdicContext(5))
    assert [poly_to_str(f.poly) for f in fact.factors] == ["X - 2", "X - 1"]
    assert all(f.certification is Certification.RATIONAL_EXACT for f in fact.factors)
    assert fact.fully_certified() and fact.product_congruent()


def test_factor_distinct_slopes():
    fact = factor_over_qp(Poly([27, -12, 1]), PAdicContext(3))
    polys = {poly_to_str(f.poly) for f in fact.factors}
    assert polys == {"X - 3", "X - 9"}
    vals = sorted(v for f in fact.factors for v in root_valuations(f.poly, 3))
    assert vals == [Fraction(1), Fraction(2)]


def test_factor_pure_slope_certificate():
    fact = factor_over_qp(Poly([3, 0, 1]), PAdicContext(3))
    (only,) = fact.factors
    assert only.irreducible and only.certification is Certification.NEWTON_SLOPE


def test_factor_irreducible_mod_p_certificate():
    fact = factor_over_qp(Poly([-18, 0, 1]), PAdicContext(3))
    (only,) = fact.factors
    assert only.irreducible and only.certification is Certification.HENSEL_COPRIME


def test_factor_hensel_split_over_q5():
    fact = factor_over_qp(Poly([1, 0, 1]), PAdicContext(5))
    assert len(fact.factors) == 2
    assert fact.product_congruent()
    for f in fact.factors:
        assert f.poly.degree == 1 and f.precision == 32
        root = -f.poly[0]
        assert valuation(root * root + 1, 5) >= 32


def test_factor_uncertified_is_legal():
    fact = factor_over_qp(Poly([-18, 0, 0, 0, 1]), PAdicContext(3))
    (only,) = fact.factors
    assert only.certification is Certification.UNCERTIFIED and not only.irreducible


def test_factor_not_squarefree():
    with pytest.raises(NotSquarefreeError):
        factor_over_qp(Poly([1, 2, 1]), PAdicContext(3))


def test_factor_degrees_and_product_invariants():
    rng = random.Random(19)
    checked = 0
    while checked < 60:
        p = rng.choice((2, 3, 5))
        d = rng.randint(1, 4)
        f = Poly([Fraction(rng.randint(-30, 30)) for _ in range(d)] + [Fraction(1)])
        if f.degree < 1 or f[0] == 0:
            continue
        from contractio.padic import poly_gcd

        if poly_gcd(f, f.derivative()).degree != 0:
            continue
        fact = factor_over_qp(f, PAdicContext(p))
        assert fact.degrees_sum() == f.degree
        assert fact.product_congruent()
        for piece in fact.factors:
            if piece.irreducible:
                assert newton_polygon(piece.poly, p).is_pure()
        checked += 1


def test_factor_mixed_irrational_slope_split():
    # (X^2 - 3)(X^2 - 18): slope 1/2 then slope 1, both pieces irrational
    f = Poly([54, 0, -21, 0, 1])
    fact = factor_over_qp(f, PAdicContext(3))
    assert {poly_to_str(fa.poly) for fa in fact.factors} == {"X^2 - 3", "X^2 - 18"}
    assert fact.fully_certified() and fact.product_congruent()


def test_squarefree_decomposition():
    f = Poly([-3, 1]) * Poly([-3, 1]) * Poly([5, 1])
    decomp = squarefree_decomposition(f)
    assert (Poly([-3, 1]), 2) in decomp and (Poly([5, 1]), 1) in decomp
    assert squarefree_part(f) == Poly([-3, 1]) * Poly([5, 1])


def test_poly_serialization():
    f = Poly([3, 3, 1])
    assert poly_to_str(f) == "X^2 + 3*X + 3"
    assert poly_to_str(Poly([-18, 0, 0, 0, 1])) == "X^4 - 18"
    assert poly_to_str(Poly([Fraction(1, 2), 1])) == "X + 1/2"
    assert poly_to_str(Poly([])) == "0"


def test_polys_congruent():
    assert polys_congruent(Poly([3 ** 10, 1]), Poly([0, 1]), 3, 10)
    assert not polys_congruent(Poly([3 ** 9, 1]), Poly([0, 1]), 3, 10)
