"""
Partial bijections, colourings and Hall's condition
===================================================

A relation with sections of size at most n splits into n graphs of partial
bijections.  Injective selectors come from maximum matchings, and when none
exists a subfamily with too small a union is returned instead.
"""

import numpy as np

from coarse_rigidity import (
    Relation,
    band,
    decompose_partial_bijections,
    greedy_coloring,
    hall_selector,
    section_bounds,
)

E = band(10, 1)
pieces = decompose_partial_bijections(E)
print(f"radius-1 band: section bound {max(section_bounds(E))}, {len(pieces)} pieces")
for p in pieces:
    print("   ", p.pairs[:6], "...")

# a denser random relation
rng = np.random.default_rng(1)
R = Relation.from_pairs(40, zip(*np.nonzero(rng.random((40, 40)) < 0.12)))
print("random relation: bound", max(section_bounds(R)),
      "pieces", len(decompose_partial_bijections(R)),
      "greedy pieces", len(decompose_partial_bijections(R, greedy=True)))

# colouring a graph whose degrees stay below n
cycle = [(i, (i + 1) % 9) for i in range(9)]
print("odd cycle colours:", greedy_coloring(9, cycle, degree_bound=3).color)

# Hall's condition
print(hall_selector([{1, 2}, {2}, {2, 3}]).selector)
bad = hall_selector([{1, 2}, {1, 2}, {2, 1}, {5}])
print("deficient subfamily:", bad.deficiency_witness)
