import numpy as np
import pytest

from coarse_rigidity import (
    SparseOperator,
    band,
    ghost_profile,
    group_filtration,
    level,
    line_filtration,
    onl_probe,
    partial_translation,
    propertyA_witness_check,
)
from coarse_rigidity.groups import cyclic_group
from coarse_rigidity.localization import localized_ratio
from coarse_rigidity.relations import Relation


def initial_segments(n):
    return [range(k) for k in range(1, n + 1)]


def test_ghost_profile_matrix_unit():
    prof = ghost_profile(SparseOperator.matrix_unit(6, 0, 0), initial_segments(6))
    assert prof.eps == (0.0,) * 6


def test_ghost_profile_block_average():
    n, k = 10, 4
    dense = np.zeros((n, n))
    dense[3:3 + k, 3:3 + k] = 1.0 / k
    a = SparseOperator.from_entries({(y, x): dense[y, x] for y in range(n) for x in range(n) if dense[y, x]}, n)
    prof = ghost_profile(a, initial_segments(n))
    covered = 3 + k
    for m, e in enumerate(prof.eps, start=1):
        assert e == (0.0 if m >= covered else 1.0 / k)


def test_ghost_profile_band_and_monotone(rng):
    prof = ghost_profile(partial_translation(band(8, 1)), initial_segments(8))
    assert prof.eps[:-1] == (1.0,) * 7 and prof.eps[-1] == 0.0
    a = SparseOperator.from_entries({(y, x): rng.standard_normal() for y in range(12) for x in range(12)}, 12)
    eps = ghost_profile(a, initial_segments(12)).eps
    assert all(x >= y for x, y in zip(eps, eps[1:]))


def test_ghost_profile_rejects_decreasing():
    with pytest.raises(ValueError):
        ghost_profile(SparseOperator.identity(3), [[0, 1], [0]])


def test_onl_diagonal_and_shift_localize_at_zero():
    f = line_filtration(20, 1)
    diag = SparseOperator.diagonal(np.linspace(1, 2, 20))
    shift = partial_translation(Relation.from_pairs(20, [(i, i + 1) for i in range(19)]))
    rep = onl_probe(f, 1, m=1000.0, num_samples=0, operators=[diag, shift])
    assert rep.k == 0
    assert all(row[0] == pytest.approx(1.0) for row in rep.ratios)


def test_onl_random_band_table():
    f = line_filtration(100, 1)
    rep = onl_probe(f, 2, m=2.0, num_samples=6, seed=4, max_k=6, full_table=True)
    assert rep.passed and rep.bounding_level == 2 * rep.k
    for row in rep.ratios:
        assert all(r <= 1.0 + 1e-12 for r in row)
        assert all(b >= a - 1e-12 for a, b in zip(row, row[1:]))


def test_onl_refusal_reports_worst_sample():
    f = line_filtration(30, 1, max_level=2)
    rep = onl_probe(f, 2, m=1e6, num_samples=3, seed=1)
    assert not rep.passed and rep.k is None
    assert rep.worst_sample in range(3)


def test_onl_witness_is_supported_in_a_ball():
    f = line_filtration(40, 1)
    rep = onl_probe(f, 1, m=2.0, num_samples=2, seed=0)
    lev = level(f, rep.k)
    for centre, xi in rep.witnesses:
        assert np.linalg.norm(xi) == pytest.approx(1.0)
        supp = np.nonzero(np.abs(xi) > 0)[0]
        assert all((centre, int(j)) in lev for j in supp)


def test_onl_seed_determinism():
    f = line_filtration(50, 1)
    a = onl_probe(f, 2, 2.0, 4, seed=9).to_dict()
    b = onl_probe(f, 2, 2.0, 4, seed=9).to_dict()
    assert a == b


def test_localized_ratio_bruteforce_small(rng):
    # against the best over all subsets of every level-1 ball, on 8 points
    f = line_filtration(8, 1)
    from coarse_rigidity.operators import random_operator
    a = random_operator(band(8, 1), rng)
    dense = a.toarray()
    norm = np.linalg.norm(dense, 2)
    best = max(np.linalg.norm(dense[:, list(b)], 2)
               for b in [range(max(0, x - 1), min(8, x + 2)) for x in range(8)])
    r, _, _ = localized_ratio(a, f, 1)
    assert r == pytest.approx(best / norm, rel=1e-10)


def test_property_a_uniform_vector_passes():
    f = line_filtration(9, 1)
    xi = np.full((9, 9), 1 / 3.0)
    for m in (1, 10, 1000):
        assert propertyA_witness_check(f, 1, m, 8, xi)


def test_property_a_point_masses_fail():
    f = line_filtration(9, 1)
    assert not propertyA_witness_check(f, 1, 1, 0, np.eye(9))


@pytest.mark.parametrize("w", [2, 4, 8, 18, 30])
@pytest.mark.parametrize("m", [1, 2, 3, 5])
def test_property_a_window_vectors(w, m):
    n = 60
    f = group_filtration(cyclic_group(n), [0, 1, n - 1])
    xi = np.zeros((n, n))
    for x in range(n):
        xi[x, [(x + j) % n for j in range(w)]] = 1 / np.sqrt(w)
    defect = max(np.linalg.norm(xi[x] - xi[(x + 1) % n]) for x in range(n))
    assert defect == pytest.approx(np.sqrt(2 / w))
    assert propertyA_witness_check(f, 1, m, w - 1, xi) == (defect < 1 / m)
    if w > 1:
        assert not propertyA_witness_check(f, 1, m, w - 2, xi)
