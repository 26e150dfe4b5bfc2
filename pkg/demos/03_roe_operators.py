"""
Bounded-propagation operators
=============================

Operators are sparse complex matrices with ``matrix[y, x] = <a delta_x, delta_y>``.
This tour covers partial translations, the crossed-product style decomposition
over a group, ghost profiles and the operator-norm localization probe.
"""

import numpy as np

from coarse_rigidity import (
    crossed_decompose,
    ghost_profile,
    line_filtration,
    onl_probe,
    partial_translation,
    spectral_norm,
    support,
)
from coarse_rigidity.groups import dihedral_group, group_entourage
from coarse_rigidity.operators import random_operator
from coarse_rigidity.relations import band

v = partial_translation(band(12, 1))
print("||v_E|| for the radius-1 band:", round(spectral_norm(v), 6))
print("support recovers the relation:", support(v) == band(12, 1))

# every operator supported in E_S on a group is a sum of diagonals times translations
D4 = dihedral_group(4)
S = [0, 1, 3, 4]          # identity, r, r^-1, s
a = random_operator(group_entourage(D4, S), np.random.default_rng(0))
dec = crossed_decompose(a, D4, S)
print("crossed residual:", np.abs((dec.reconstruct() - a).toarray()).max())

# ghost profile: how fast entries die off outside growing finite sets
prof = ghost_profile(v, [range(k) for k in range(2, 13, 2)])
print("ghost profile of v:", prof.eps)

# localization: smallest ball radius where random band operators keep half their norm
X = line_filtration(100, 1)
rep = onl_probe(X, e_level=3, m=4, num_samples=8, seed=0, max_k=8, full_table=True)
print(f"k = {rep.k}, witnesses are level-{rep.bounding_level} bounded")
print("ratios of sample 0:", np.round(rep.ratios[0], 3))
