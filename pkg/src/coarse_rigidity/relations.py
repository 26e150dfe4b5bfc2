"""Ground sets and finite relations (entourages) over them.

A relation is a finite set of ordered index pairs ``(x, y)`` over a ground set
``{0, ..., size - 1}``.  Composition follows the convention

    E o F = {(x, z) : exists y with (x, y) in E and (y, z) in F},

so that in matrix terms (``M[x, y] = 1`` iff ``(x, y)`` is a pair) composition
is an ordinary boolean matrix product ``M_E @ M_F``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "GroundSet",
    "Relation",
    "compose",
    "inverse",
    "union",
    "diagonal",
    "band",
    "section_bounds",
    "metric_entourage",
    "splitting_points",
    "bounded_sets_ok",
]


@dataclass(frozen=True)
class GroundSet:
    """The finite index set ``{0, ..., size - 1}`` with optional display labels."""

    size: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 1:
            raise ValueError(f"ground set size must be a positive integer, got {self.size!r}")
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != self.size:
                raise ValueError(f"expected {self.size} labels, got {len(labels)}")
            if len(set(labels)) != len(labels):
                raise ValueError("labels must be pairwise distinct")
            object.__setattr__(self, "labels", labels)

    def __len__(self):
        return self.size

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels is not None else str(i)


def _as_ground(ground) -> GroundSet:
    if isinstance(ground, GroundSet):
        return ground
    return GroundSet(int(ground))


@dataclass(frozen=True)
class Relation:
    """A finite set of index pairs over a ground set.

    Construct with ``Relation.from_pairs(size, pairs)``; the raw constructor
    expects an already validated ``frozenset``.
    """

    ground: GroundSet
    pairs: frozenset = field(default_factory=frozenset)

    @classmethod
    def from_pairs(cls, ground, pairs: Iterable[Sequence[int]] = ()) -> "Relation":
        ground = _as_ground(ground)
        n = ground.size
        out = set()
        for p in pairs:
            x, y = int(p[0]), int(p[1])
            if not (0 <= x < n and 0 <= y < n):
                raise ValueError(f"pair {(x, y)} out of range for ground set of size {n}")
            out.add((x, y))
        return cls(ground, frozenset(out))

    @classmethod
    def from_matrix(cls, ground, matrix) -> "Relation":
        """Relation whose pairs are the nonzero positions ``(row, col)`` of ``matrix``."""
        ground = _as_ground(ground)
        m = sp.coo_array(matrix)
        if m.shape != (ground.size, ground.size):
            raise ValueError(f"matrix shape {m.shape} does not match ground size {ground.size}")
        mask = m.data != 0
        rows, cols = m.row[mask], m.col[mask]
        return cls(ground, frozenset(zip(rows.tolist(), cols.tolist())))

    @property
    def size(self) -> int:
        return self.ground.size

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(sorted(self.pairs))

    def __contains__(self, pair):
        return tuple(pair) in self.pairs

    def __le__(self, other: "Relation") -> bool:
        _check_same(self, other)
        return self.pairs <= other.pairs

    def __or__(self, other: "Relation") -> "Relation":
        return union(self, other)

    def __and__(self, other: "Relation") -> "Relation":
        _check_same(self, other)
        return Relation(self.ground, self.pairs & other.pairs)

    def __sub__(self, other: "Relation") -> "Relation":
        _check_same(self, other)
        return Relation(self.ground, self.pairs - other.pairs)

    def __repr__(self):
        shown = sorted(self.pairs)[:6]
        more = ", ..." if len(self.pairs) > 6 else ""
        return f"Relation(size={self.size}, pairs={shown}{more})"

    @cached_property
    def array(self) -> np.ndarray:
        """Pairs as a sorted ``(m, 2)`` integer array."""
        if not self.pairs:
            return np.zeros((0, 2), dtype=np.int64)
        return np.array(sorted(self.pairs), dtype=np.int64)

    @cached_property
    def matrix(self) -> sp.csr_array:
        """Boolean adjacency matrix with ``matrix[x, y]`` set iff ``(x, y)`` is a pair."""
        a = self.array
        n = self.size
        return sp.csr_array(
            (np.ones(len(a), dtype=bool), (a[:, 0], a[:, 1])), shape=(n, n)
        )

    def row_section(self, x: int) -> list[int]:
        m = self.matrix
        return m.indices[m.indptr[x]:m.indptr[x + 1]].tolist()

    def col_section(self, y: int) -> list[int]:
        m = self.matrix.T.tocsr()
        return m.indices[m.indptr[y]:m.indptr[y + 1]].tolist()

    def is_symmetric(self) -> bool:
        return self.pairs == inverse(self).pairs

    def is_reflexive(self) -> bool:
        return all((i, i) in self.pairs for i in range(self.size))

    def to_dict(self) -> dict:
        return {"size": self.size, "pairs": [list(p) for p in sorted(self.pairs)]}


def _check_same(e: Relation, f: Relation):
    if e.size != f.size:
        raise ValueError(f"relations live on different ground sets ({e.size} vs {f.size})")


def compose(e: Relation, f: Relation) -> Relation:
    """``{(x, z) : (x, y) in e and (y, z) in f for some y}``."""
    _check_same(e, f)
    prod = (e.matrix.astype(np.int32) @ f.matrix.astype(np.int32)).tocoo()
    return Relation(e.ground, frozenset(zip(prod.row.tolist(), prod.col.tolist())))


def inverse(e: Relation) -> Relation:
    return Relation(e.ground, frozenset((y, x) for x, y in e.pairs))


def union(*relations: Relation) -> Relation:
    if not relations:
        raise ValueError("union of no relations")
    first = relations[0]
    out = set(first.pairs)
    for r in relations[1:]:
        _check_same(first, r)
        out |= r.pairs
    return Relation(first.ground, frozenset(out))


def diagonal(ground) -> Relation:
    ground = _as_ground(ground)
    return Relation(ground, frozenset((i, i) for i in range(ground.size)))


def band(ground, radius: int) -> Relation:
    """All pairs ``(i, j)`` with ``|i - j| <= radius`` on the ordered ground set."""
    ground = _as_ground(ground)
    n = ground.size
    r = int(radius)
    return Relation(
        ground,
        frozenset(
            (i, j) for i in range(n) for j in range(max(0, i - r), min(n, i + r + 1))
        ),
    )


def section_bounds(e: Relation) -> tuple[int, int]:
    """Maximal row-section and column-section cardinalities of ``e``.

    Returns ``(max_x |{y : (x, y) in e}|, max_y |{x : (x, y) in e}|)``; both are
    zero for the empty relation.
    """
    if not e.pairs:
        return 0, 0
    a = e.array
    rows = np.bincount(a[:, 0], minlength=e.size)
    cols = np.bincount(a[:, 1], minlength=e.size)
    return int(rows.max()), int(cols.max())


def metric_entourage(points, r: float, *, explicit: bool = False) -> Relation:
    """All pairs at distance ``<= r``.

    ``points`` is a sequence of coordinate tuples (Euclidean distance), or, with
    ``explicit=True``, a square distance table.  Ties at ``r`` are included.
    """
    if r < 0:
        raise ValueError("radius must be nonnegative")
    arr = np.asarray(points, dtype=float)
    if explicit:
        d = arr
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError("distance table must be square")
        if np.any(d < 0):
            raise ValueError("distance table has negative entries")
        if not np.array_equal(d, d.T):
            raise ValueError("distance table is not symmetric")
        if np.any(np.diag(d) != 0):
            raise ValueError("distance table must have a zero diagonal")
    else:
        if arr.ndim == 1:
            arr = arr[:, None]
        diff = arr[:, None, :] - arr[None, :, :]
        d = np.sqrt((diff ** 2).sum(axis=-1))
    rows, cols = np.nonzero(d <= r)
    return Relation(GroundSet(d.shape[0]), frozenset(zip(rows.tolist(), cols.tolist())))


def splitting_points(e: Relation) -> frozenset:
    """Indices ``n`` not straddled by any pair of ``e``.

    ``n`` is a splitting point when no pair ``(i, j)`` or ``(j, i)`` of ``e``
    has ``i < n <= j``.  Each pair with ``i < j`` kills the half-open range
    ``(i, j]``; a difference array marks them in one pass.
    """
    n = e.size
    cover = np.zeros(n + 1, dtype=np.int64)
    for x, y in e.pairs:
        lo, hi = (x, y) if x < y else (y, x)
        if lo < hi:
            cover[lo + 1] += 1
            cover[hi + 1] -= 1
    crossed = np.cumsum(cover)[:n] > 0
    return frozenset(np.nonzero(~crossed)[0].tolist())


def bounded_sets_ok(subset: Iterable[int], e: Relation) -> bool:
    """Whether ``subset`` is ``e``-bounded, i.e. ``subset x subset`` lies in ``e``."""
    s = list(subset)
    return all((a, b) in e.pairs for a in s for b in s)
