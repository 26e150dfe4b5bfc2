import numpy as np
import pytest

from coarse_rigidity import (
    Relation,
    SparseOperator,
    amplify,
    band,
    compose,
    diagonal,
    explicit_filtration,
    filter_filtration,
    filter_membership,
    group_filtration,
    level,
    line_filtration,
    membership_level,
    partial_translation,
    section_bounds,
    splitting_points,
    structure_from_operators,
)
from coarse_rigidity.filtration import CACHE_ENV, filtration_from_dict
from coarse_rigidity.groups import cyclic_group

from conftest import random_relation


def test_level_zero_and_band_growth():
    f = line_filtration(10, 1)
    assert level(f, 0) == diagonal(10)
    assert level(f, 2) == band(10, 2)


def test_level_cap_enforced():
    f = line_filtration(5, 1, max_level=3)
    with pytest.raises(ValueError):
        level(f, 4)


def test_level_three_compositions(rng):
    gen = random_relation(rng, 20, 0.06)
    f = explicit_filtration(gen)
    g = f.generator
    assert level(f, 3) == compose(compose(compose(diagonal(20), g), g), g)


def test_levels_nested_and_symmetric(rng):
    f = explicit_filtration(random_relation(rng, 25, 0.05))
    prev = level(f, 0)
    for k in range(1, 6):
        cur = level(f, k)
        assert prev <= cur and cur.is_symmetric()
        prev = cur


def test_membership_examples():
    f = line_filtration(12, 1)
    assert membership_level(f.generator, f).level == 1
    assert membership_level(band(12, 2), f).level == 2
    assert not band(12, 2) <= level(f, 1)


def test_membership_refusal_on_disconnected_generator():
    gen = Relation.from_pairs(6, [(0, 1), (1, 2), (3, 4), (4, 5)])
    f = explicit_filtration(gen)
    cert = membership_level(Relation.from_pairs(6, [(0, 1), (2, 3)]), f)
    assert not cert.contained
    assert cert.witness == (2, 3)


def test_membership_refusal_beyond_cap():
    f = line_filtration(20, 1, max_level=4)
    cert = membership_level(Relation.from_pairs(20, [(0, 10)]), f)
    assert not cert.contained and cert.witness == (0, 10)


def test_amplify_examples():
    f = line_filtration(6, 1)
    one = amplify(f, 1)
    assert one.generator.pairs == f.generator.pairs
    two = amplify(explicit_filtration(diagonal(4)), 2)
    assert two.generator.pairs == {(2 * y + i, 2 * y + j) for y in range(4) for i in range(2) for j in range(2)}
    three = amplify(f, 3)
    assert section_bounds(three.generator)[0] == 3 * section_bounds(f.generator)[0]


def test_structure_from_operators():
    e = Relation.from_pairs(8, [(0, 3), (5, 1)])
    f = structure_from_operators([partial_translation(e)], 0.5)
    assert e <= f.generator
    assert structure_from_operators([], 0.5, ground=5).generator == diagonal(5)
    n = 10
    entries = {(y, x): 2.0 ** (-abs(x - y)) for x in range(n) for y in range(n)}
    a = SparseOperator.from_entries(entries, n)
    assert structure_from_operators([a], 0.3).generator == band(n, 1)


def test_group_filtration_levels():
    f = group_filtration(cyclic_group(12), [0, 1, 11])
    assert membership_level(level(f, 6), f).level == 6
    assert len(level(f, 6)) == 144


def e_b(n, b):
    return Relation.from_pairs(n, [(i - 1, i) for i in range(1, n) if i not in b])


def test_splitting_of_e_b_finite():
    # on a finite interval the left end 0 is never straddled, so S(E_B) = B u {0}
    n, b = 20, {4, 9, 15}
    assert splitting_points(e_b(n, b)) == b | {0}


def test_filter_membership_e_b():
    n = 20
    base = [[0, 5, 10, 15], [0, 10]]
    f = filter_filtration(n, base)
    inside = filter_membership(e_b(n, {5, 10, 15}), f)
    assert inside.contained and inside.base_index == 0
    outside = filter_membership(e_b(n, {5, 15}), f)
    assert not outside.contained
    assert filter_membership(diagonal(n), f).contained


def test_filter_membership_band_restricted_to_a():
    n = 16
    a = {i for i in range(n) if i % 3 == 0}
    e1 = Relation.from_pairs(n, [(i, j) for i in range(n) for j in range(n)
                                 if abs(i - j) <= 1 and max(i, j) in a])
    s = splitting_points(e1)
    assert s == (set(range(n)) - a) | {0}
    refused = filter_membership(e1, filter_filtration(n, [sorted(a)]))
    assert not refused.contained and refused.splitting == s
    accepted = filter_membership(e1, filter_filtration(n, [sorted(set(range(n)) - a)]))
    assert accepted.contained


def test_filter_base_must_be_directed():
    with pytest.raises(ValueError):
        filter_filtration(6, [[0, 1], [2, 3]])


def test_serialization_roundtrip():
    f = filter_filtration(10, [[0, 5], [0]])
    g = filtration_from_dict(f.to_dict())
    assert g.kind == f.kind and g.generator == f.generator and g.filter_base == f.filter_base


def test_disk_cache_is_transparent(tmp_path, monkeypatch):
    monkeypatch.setenv(CACHE_ENV, str(tmp_path))
    d1 = line_filtration(30, 2).distances()
    assert any(tmp_path.iterdir())
    d2 = line_filtration(30, 2).distances()
    assert np.array_equal(d1, d2)
    monkeypatch.delenv(CACHE_ENV)
    assert np.array_equal(line_filtration(30, 2).distances(), d1)
