"""Finite groups given by multiplication tables, and their entourages ``E_S``."""

from __future__ import annotations

from itertools import permutations
from typing import Iterable

import numpy as np

from .relations import GroundSet, Relation

__all__ = [
    "Group",
    "cyclic_group",
    "dihedral_group",
    "symmetric_group",
    "group_entourage",
]


class Group:
    """A finite group on ``{0, ..., n-1}`` with ``table[g, h] = g * h``.

    The table is validated on construction (closure, identity, inverses,
    associativity); a ``ValueError`` names the first failing axiom.
    """

    def __init__(self, table, names: Iterable[str] | None = None):
        t = np.asarray(table)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
            raise ValueError("multiplication table must be a nonempty square array")
        if not np.issubdtype(t.dtype, np.integer):
            if not np.array_equal(t, np.round(t)):
                raise ValueError("multiplication table must contain integers")
            t = t.astype(np.int64)
        n = t.shape[0]
        if t.min() < 0 or t.max() >= n:
            raise ValueError("multiplication table has out-of-range entries")
        idx = np.arange(n)
        ids = [e for e in range(n) if np.array_equal(t[e], idx) and np.array_equal(t[:, e], idx)]
        if not ids:
            raise ValueError("no identity element")
        e = ids[0]
        inv = np.full(n, -1, dtype=np.int64)
        for g in range(n):
            (hs,) = np.nonzero(t[g] == e)
            if len(hs) != 1 or t[hs[0], g] != e:
                raise ValueError(f"element {g} has no two-sided inverse")
            inv[g] = hs[0]
        # (gh)k == g(hk) for all triples, vectorized over the last two indices
        left = t[t, :]          # left[g, h, k] = (g*h)*k
        right = t[:, t]         # right[g, h, k] = g*(h*k)
        if not np.array_equal(left, right):
            g, h, k = np.argwhere(left != right)[0]
            raise ValueError(f"table is not associative at ({g}, {h}, {k})")
        self.table = t
        self.order = n
        self.identity = int(e)
        self.inverse = inv
        self.names = tuple(names) if names is not None else tuple(str(i) for i in range(n))

    def __len__(self):
        return self.order

    def __repr__(self):
        return f"Group(order={self.order})"

    def mul(self, g: int, h: int) -> int:
        return int(self.table[g, h])

    def inv(self, g: int) -> int:
        return int(self.inverse[g])

    def product_set(self, s: Iterable[int], t: Iterable[int]) -> frozenset:
        return frozenset(int(self.table[a, b]) for a in s for b in t)

    def inverse_set(self, s: Iterable[int]) -> frozenset:
        return frozenset(int(self.inverse[a]) for a in s)

    def power_set(self, s: Iterable[int], m: int) -> frozenset:
        """``S^m``, with ``S^0 = {e}``."""
        out = frozenset([self.identity])
        s = frozenset(s)
        for _ in range(m):
            out = self.product_set(out, s)
        return out

    @property
    def ground(self) -> GroundSet:
        return GroundSet(self.order, self.names)


def cyclic_group(n: int) -> Group:
    idx = np.arange(n)
    return Group((idx[:, None] + idx[None, :]) % n)


def dihedral_group(n: int) -> Group:
    """Symmetries of the regular ``n``-gon, order ``2n``.

    Element ``k + n*f`` is ``r^k s^f``; ``r`` is index 1 and ``s`` is index ``n``.
    """
    order = 2 * n
    table = np.zeros((order, order), dtype=np.int64)
    for a in range(order):
        k1, f1 = a % n, a // n
        for b in range(order):
            k2, f2 = b % n, b // n
            # r^k1 s^f1 r^k2 s^f2 = r^(k1 + (-1)^f1 k2) s^(f1+f2)
            k = (k1 + (k2 if f1 == 0 else -k2)) % n
            table[a, b] = k + n * ((f1 + f2) % 2)
    names = [f"r{k}" if f == 0 else f"r{k}s" for f in range(2) for k in range(n)]
    return Group(table, names)


def symmetric_group(n: int) -> Group:
    """``S_n`` with ``(p * q)(i) = p(q(i))``; element order follows ``itertools.permutations``."""
    perms = list(permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    table = np.array(
        [[index[tuple(p[q[i]] for i in range(n))] for q in perms] for p in perms],
        dtype=np.int64,
    )
    return Group(table, ["".join(map(str, p)) for p in perms])


def group_entourage(group: Group, s: Iterable[int]) -> Relation:
    """``E_S = {(g, h) : g h^{-1} in S}``."""
    s = set(int(a) for a in s)
    bad = [a for a in s if not 0 <= a < group.order]
    if bad:
        raise ValueError(f"elements {bad} are not in the group")
    t, inv = group.table, group.inverse
    pairs = set()
    # g h^{-1} = a  <=>  g = a h
    for a in s:
        for h in range(group.order):
            pairs.add((int(t[a, h]), h))
    return Relation(group.ground, frozenset(pairs))
