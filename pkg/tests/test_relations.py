import numpy as np
import pytest
from hypothesis import given, strategies as st

from coarse_rigidity import (
    Relation,
    band,
    compose,
    diagonal,
    inverse,
    metric_entourage,
    section_bounds,
    splitting_points,
    union,
)
from coarse_rigidity.groups import cyclic_group, dihedral_group, group_entourage, Group
from coarse_rigidity.relations import bounded_sets_ok

from conftest import brute_compose, random_relation


pairs_strategy = st.lists(st.tuples(st.integers(0, 11), st.integers(0, 11)), max_size=40)


def test_compose_single_chain():
    e = Relation.from_pairs(3, [(0, 1)])
    f = Relation.from_pairs(3, [(1, 2)])
    assert compose(e, f).pairs == {(0, 2)}


@given(pairs_strategy)
def test_diagonal_is_left_unit(pairs):
    e = Relation.from_pairs(12, pairs)
    assert compose(diagonal(12), e) == e
    assert compose(e, diagonal(12)) == e


def test_compose_matches_triple_loop(rng):
    for _ in range(5):
        e, f = random_relation(rng, 32, 0.08), random_relation(rng, 32, 0.08)
        assert compose(e, f).pairs == brute_compose(e, f)


def test_compose_associative_on_samples(rng):
    for _ in range(200):
        n = int(rng.integers(1, 33))
        e, f, g = (random_relation(rng, n, 0.15) for _ in range(3))
        assert compose(compose(e, f), g) == compose(e, compose(f, g))


def test_inverse_examples():
    assert inverse(diagonal(5)) == diagonal(5)
    assert inverse(Relation.from_pairs(4, [(0, 3)])).pairs == {(3, 0)}


@given(pairs_strategy)
def test_inverse_involution_and_antihomomorphism(pairs):
    e = Relation.from_pairs(12, pairs)
    f = Relation.from_pairs(12, [(b, a) for a, b in pairs[::2]])
    assert inverse(inverse(e)) == e
    assert inverse(compose(e, f)) == compose(inverse(f), inverse(e))


def test_section_bounds():
    assert section_bounds(band(11, 2)) == (5, 5)
    assert section_bounds(diagonal(7)) == (1, 1)


def test_section_bounds_tally(rng):
    e = random_relation(rng, 40, 0.2)
    m = np.zeros((40, 40), dtype=int)
    for x, y in e.pairs:
        m[x, y] = 1
    assert section_bounds(e) == (m.sum(1).max(), m.sum(0).max())


def test_metric_entourage_line():
    e = metric_entourage(list(range(10)), 1)
    assert e == band(10, 1)
    assert len(e) == 28
    assert metric_entourage(list(range(10)), 0) == diagonal(10)


def test_metric_entourage_plane(rng):
    pts = rng.integers(0, 6, size=(25, 2))
    e = metric_entourage([tuple(p) for p in pts], 2.0)
    want = {(i, j) for i in range(25) for j in range(25)
            if np.hypot(*(pts[i] - pts[j])) <= 2.0}
    assert e.pairs == want


def test_metric_entourage_explicit_table_validation():
    d = np.array([[0, 1], [2, 0]])
    with pytest.raises(ValueError):
        metric_entourage(d, 1, explicit=True)
    with pytest.raises(ValueError):
        metric_entourage([[1, 1], [1, 0]], 1, explicit=True)
    with pytest.raises(ValueError):
        metric_entourage([[0, 1], [1, 0]], -1, explicit=True)
    assert len(metric_entourage([[0, 3], [3, 0]], 2, explicit=True)) == 2


def test_group_entourage_small():
    z4 = cyclic_group(4)
    assert group_entourage(z4, [1]).pairs == {(1, 0), (2, 1), (3, 2), (0, 3)}
    assert len(group_entourage(z4, [])) == 0


def test_group_entourage_z12_enumeration():
    z12 = cyclic_group(12)
    e = group_entourage(z12, [0, 1, 11])
    want = {(g, h) for g in range(12) for h in range(12) if (g - h) % 12 in (0, 1, 11)}
    assert e.pairs == want
    assert e.is_symmetric() and e.is_reflexive()


def test_group_validation_rejects_bad_table():
    with pytest.raises(ValueError):
        Group([[0, 1], [0, 1]])
    with pytest.raises(ValueError):
        group_entourage(cyclic_group(3), [5])


def test_dihedral_group_structure():
    d4 = dihedral_group(4)
    assert d4.order == 8
    r, s = 1, 4
    assert d4.mul(s, s) == d4.identity
    # s r s = r^-1
    assert d4.mul(d4.mul(s, r), s) == d4.inv(r)


FIGURE_BLOCKS = [range(0, 3), range(5, 8), range(9, 12), range(14, 17)]


def figure_relation():
    pairs = [(i, j) for b in FIGURE_BLOCKS for i in b for j in b]
    pairs += [(i, i) for i in (3, 4, 8, 12, 13)]
    return Relation.from_pairs(17, pairs)


def test_splitting_points_figure():
    assert splitting_points(figure_relation()) == {0, 3, 4, 5, 8, 9, 12, 13, 14}


def test_splitting_points_empty_relation():
    assert splitting_points(Relation.from_pairs(9, [])) == set(range(9))


def brute_splitting(e):
    return {n for n in range(e.size)
            if not any(min(x, y) < n <= max(x, y) for x, y in e.pairs)}


def test_splitting_points_bruteforce(rng):
    for _ in range(50):
        e = random_relation(rng, int(rng.integers(1, 30)), 0.03)
        assert splitting_points(e) == brute_splitting(e)


@given(pairs_strategy, pairs_strategy)
def test_splitting_point_algebra(p, q):
    e, f = Relation.from_pairs(12, p), Relation.from_pairs(12, q)
    se, sf = splitting_points(e), splitting_points(f)
    assert se == splitting_points(inverse(e))
    assert se & sf <= splitting_points(compose(e, f))
    assert se & sf <= splitting_points(union(e, f))


def test_bounded_sets():
    e = band(10, 1)
    assert bounded_sets_ok([3, 4], e)
    assert not bounded_sets_ok([3, 5], e)


def test_relation_to_dict_roundtrip():
    e = band(6, 1)
    d = e.to_dict()
    assert Relation.from_pairs(d["size"], d["pairs"]) == e
