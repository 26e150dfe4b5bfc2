"""
Entourages, levels and splitting points
=======================================

A finite coarse space here is a ground set plus a generating relation.
Levels are repeated compositions of the generator, and every finite relation
sits in some level (or is refused with a witness pair).
"""

from coarse_rigidity import (
    Relation,
    band,
    filter_filtration,
    filter_membership,
    level,
    line_filtration,
    membership_level,
    section_bounds,
    splitting_points,
)

# the line {0..19} with its radius-1 band as generator
X = line_filtration(20, radius=1)
print("level(3) equals the radius-3 band:", level(X, 3) == band(20, 3))

# membership: a far pair needs a high level
E = Relation.from_pairs(20, [(2, 9), (4, 5)])
cert = membership_level(E, X)
print("E lies in level", cert.level)

# section bounds measure uniform local finiteness
print("section bounds of the radius-2 band:", section_bounds(band(20, 2)))

# splitting points: indices no pair of E straddles
blocks = [range(0, 3), range(5, 8), range(9, 12), range(14, 17)]
fig = Relation.from_pairs(17, [(i, j) for b in blocks for i in b for j in b]
                          + [(i, i) for i in (3, 4, 8, 12, 13)])
print("splitting points of the block relation:", sorted(splitting_points(fig)))

# a filter-restricted structure only keeps relations whose splitting set is
# large in the filter; the band restricted to multiples of 3 gets refused
# when the filter asks for the multiples of 3 themselves
A = [i for i in range(18) if i % 3 == 0]
E1 = Relation.from_pairs(18, [(i, j) for i in range(18) for j in range(18)
                              if abs(i - j) <= 1 and max(i, j) in A])
F = filter_filtration(18, [A])
res = filter_membership(E1, F)
print("E1 contained:", res.contained, "|", res.reason)
