import math
import random
from collections import Counter

import pytest

from contractio.errors import TooLargeError, ValidationError
from contractio.finitegroup import (
    FiniteGroup,
    abelian_name,
    chief_series_finite,
    composition_series_finite,
    is_simple_finite,
    iso_finite,
    iso_label,
    make_catalog_group,
)

from support import brute_is_simple


def test_catalog_orders():
    assert make_catalog_group("cyclic", 1).order == 1
    assert make_catalog_group("cyclic", 5).order == 5
    assert make_catalog_group("alternating", 5).order == 60
    assert make_catalog_group("symmetric", 4).order == 24
    assert make_catalog_group("dihedral", 6).order == 12


def test_catalog_tables_are_groups():
    for fam, n in [("cyclic", 12), ("dihedral", 5), ("symmetric", 4), ("alternating", 4)]:
        make_catalog_group(fam, n).validate()


def test_catalog_too_large():
    with pytest.raises(TooLargeError):
        make_catalog_group("symmetric", 8)


def test_validation_rejects_mutated_table():
    rng = random.Random(3)
    for fam, n in [("cyclic", 6), ("symmetric", 3), ("dihedral", 4)]:
        F = make_catalog_group(fam, n)
        for _ in range(10):
            rows = [list(r) for r in F.table]
            i, j = rng.randrange(F.order), rng.randrange(F.order)
            old = rows[i][j]
            rows[i][j] = (old + 1 + rng.randrange(F.order - 1)) % F.order
            if rows == [list(r) for r in F.table]:
                continue
            with pytest.raises(ValidationError):
                FiniteGroup(rows)


def test_simplicity():
    assert is_simple_finite(make_catalog_group("cyclic", 5))
    assert not is_simple_finite(make_catalog_group("cyclic", 4))
    assert is_simple_finite(make_catalog_group("alternating", 5))
    assert not is_simple_finite(make_catalog_group("symmetric", 4))


def test_simplicity_cp_for_primes_up_to_97():
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97):
        assert is_simple_finite(make_catalog_group("cyclic", p))


def test_simplicity_matches_brute_force():
    for fam, n in [("cyclic", 6), ("cyclic", 7), ("symmetric", 3), ("alternating", 4), ("alternating", 5)]:
        F = make_catalog_group(fam, n)
        assert is_simple_finite(F) == brute_is_simple([list(r) for r in F.table])


def _factor_orders(series):
    return sorted(f.order for f in series.factors)


def test_composition_series_examples():
    c12 = composition_series_finite(make_catalog_group("cyclic", 12))
    assert _factor_orders(c12) == [2, 2, 3]
    s4 = composition_series_finite(make_catalog_group("symmetric", 4))
    assert _factor_orders(s4) == [2, 2, 2, 3]
    cp = composition_series_finite(make_catalog_group("cyclic", 7))
    assert _factor_orders(cp) == [7]


def test_composition_series_chain_is_subnormal_with_simple_factors():
    for fam, n in [("symmetric", 4), ("cyclic", 12), ("dihedral", 6)]:
        F = make_catalog_group(fam, n)
        fs = composition_series_finite(F)
        for small, big in zip(fs.subgroups, fs.subgroups[1:]):
            assert small < big
            sub, index = F.subgroup_group(big)
            inner = frozenset(index[x] for x in small)
            assert sub.is_normal(inner)
        for fac in fs.factors:
            assert is_simple_finite(fac)


def test_composition_factors_invariant_across_seeds():
    for fam, n in [("symmetric", 4), ("cyclic", 24), ("dihedral", 10), ("alternating", 4)]:
        F = make_catalog_group(fam, n)
        base = None
        for seed in range(6):
            fs = composition_series_finite(F, seed=seed)
            key = sorted(iso_label(f).key() for f in fs.factors)
            if base is None:
                base = key
            assert key == base


def test_chief_series_steps_normal_in_whole_group():
    F = make_catalog_group("symmetric", 4)
    fs = chief_series_finite(F)
    for step in fs.subgroups:
        assert F.is_normal(step)
    assert [f.order for f in fs.factors] == [4, 3, 2]
    assert iso_label(fs.factors[0]).name == "C2xC2"


def test_iso_label_and_iso_finite():
    C6 = make_catalog_group("cyclic", 6)
    rng = random.Random(9)
    perm = list(range(1, 6))
    rng.shuffle(perm)
    perm = [0] + perm
    inv = [perm.index(i) for i in range(6)]
    relabeled = [[perm[C6.table[inv[a]][inv[b]]] for b in range(6)] for a in range(6)]
    C6r = FiniteGroup(relabeled)
    assert iso_finite(C6, C6r)
    assert iso_label(C6r).name == "C6"

    C4 = make_catalog_group("cyclic", 4)
    V4 = FiniteGroup([[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]])
    assert iso_label(C4).key() != iso_label(V4).key()
    assert not iso_finite(C4, V4)

    S3 = make_catalog_group("symmetric", 3)
    assert not iso_finite(C6, S3)
    assert iso_label(S3).abelian is False and iso_label(C6).abelian is True


def test_iso_finite_respects_catalog_coincidences():
    # D3 and S3 are isomorphic order-6 nonabelian groups
    assert iso_finite(make_catalog_group("dihedral", 3), make_catalog_group("symmetric", 3))


def test_abelian_name():
    assert abelian_name(make_catalog_group("cyclic", 12)) == "C12"
    V4 = FiniteGroup([[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]])
    assert abelian_name(V4) == "C2xC2"


def test_subgroup_budget():
    F = make_catalog_group("symmetric", 7)
    assert F.order == 5040
    with pytest.raises(TooLargeError):
        F.minimal_normal_subgroups()


def test_exponent_and_orders():
    S4 = make_catalog_group("symmetric", 4)
    assert S4.exponent() == 12
    assert max(S4.element_orders()) == 4
    assert S4.element_order(0) == 1
