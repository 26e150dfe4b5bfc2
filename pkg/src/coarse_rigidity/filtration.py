"""Coarse structures on finite sets, represented as filtrations of relations.

A ``CoarseFiltration`` stores one symmetric, reflexive generator ``G`` and
exposes ``level(k) = G o G o ... o G`` (``k`` factors, ``level(0)`` the
diagonal).  Every relation on a finite set lies in *some* coarse structure, so
the quantity that carries information is the minimal level containing a
relation; ``membership_level`` returns it together with a certificate.
"""

from __future__ import annotations

import hashlib
import os
import threading
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import shortest_path

from .groups import Group, group_entourage
from .operators import SparseOperator, support
from .relations import (
    GroundSet,
    Relation,
    _as_ground,
    band,
    compose,
    diagonal,
    inverse,
    splitting_points,
    union,
)

__all__ = [
    "KINDS",
    "DEFAULT_MAX_LEVEL",
    "CoarseFiltration",
    "MembershipCertificate",
    "level",
    "membership_level",
    "filter_membership",
    "metric_filtration",
    "line_filtration",
    "group_filtration",
    "filter_filtration",
    "explicit_filtration",
    "amplify",
    "structure_from_operators",
    "CACHE_ENV",
]

KINDS = ("metric", "group", "filter-restricted", "explicit", "amplified", "operator-induced")
DEFAULT_MAX_LEVEL = 64
CACHE_ENV = "COARSE_RIGIDITY_CACHE"

UNREACHABLE = -1


@dataclass(frozen=True)
class MembershipCertificate:
    """Outcome of a membership search.

    ``level`` is the minimal ``k`` with the relation inside ``level(k)`` when
    ``contained``; otherwise ``witness`` is a pair outside ``level(max_level)``.
    Filter checks additionally record the splitting set and the base element
    that was matched (``base_index``) or that failed.
    """

    contained: bool
    level: int | None = None
    witness: tuple[int, int] | None = None
    splitting: frozenset | None = None
    base_index: int | None = None
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "contained": self.contained,
            "level": self.level,
            "witness": list(self.witness) if self.witness is not None else None,
            "splitting": sorted(self.splitting) if self.splitting is not None else None,
            "base_index": self.base_index,
            "reason": self.reason,
        }


def _symmetrize(gen: Relation) -> Relation:
    return union(gen, inverse(gen), diagonal(gen.ground))


@dataclass(frozen=True, eq=False)
class CoarseFiltration:
    """Filtration ``level(0) <= level(1) <= ... <= level(max_level)``.

    The generator is symmetrized and made reflexive on construction, so every
    level is a symmetric reflexive relation and levels compose additively.
    """

    generator: Relation
    kind: str = "explicit"
    max_level: int = DEFAULT_MAX_LEVEL
    filter_base: tuple[frozenset, ...] | None = None
    fiber: int | None = None
    _levels: list = field(default_factory=list, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)
    _dist: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown filtration kind {self.kind!r}")
        if int(self.max_level) != self.max_level or self.max_level < 1:
            raise ValueError("max_level must be a positive integer")
        object.__setattr__(self, "generator", _symmetrize(self.generator))
        if self.kind == "filter-restricted":
            if not self.filter_base:
                raise ValueError("filter-restricted filtration needs a nonempty base")
            base = tuple(frozenset(int(i) for i in b) for b in self.filter_base)
            n = self.size
            for b in base:
                if any(not 0 <= i < n for i in b):
                    raise ValueError("filter base element is not a subset of the ground set")
            for i, a in enumerate(base):
                for j, b in enumerate(base):
                    meet = a & b
                    if not any(c <= meet for c in base):
                        raise ValueError(
                            f"filter base is not directed: no element inside base[{i}] & base[{j}]"
                        )
            object.__setattr__(self, "filter_base", base)
        elif self.filter_base is not None:
            raise ValueError("filter_base is only meaningful for filter-restricted kind")

    @property
    def ground(self) -> GroundSet:
        return self.generator.ground

    @property
    def size(self) -> int:
        return self.generator.size

    def level(self, k: int) -> Relation:
        return level(self, k)

    def distances(self) -> np.ndarray:
        """Hop distances in the generator graph (``-1`` for unreachable pairs).

        ``(x, y)`` lies in ``level(k)`` iff ``0 <= d[x, y] <= k``.  Results are
        memoized per instance and, when ``COARSE_RIGIDITY_CACHE`` names a
        directory, on disk keyed by a hash of the generator.
        """
        with self._lock:
            if self._dist:
                return self._dist[0]
        d = _cached_distances(self.generator)
        with self._lock:
            if not self._dist:
                self._dist.append(d)
            return self._dist[0]

    def to_dict(self) -> dict:
        out = {
            "kind": _KIND_TO_JSON[self.kind],
            "generator": self.generator.to_dict(),
            "max_level": self.max_level,
        }
        if self.filter_base is not None:
            out["filter_base"] = [sorted(b) for b in self.filter_base]
        if self.fiber is not None:
            out["fiber"] = self.fiber
        return out


_KIND_TO_JSON = {
    "metric": "metric",
    "group": "group",
    "filter-restricted": "filter",
    "explicit": "explicit",
    "amplified": "amplified",
    "operator-induced": "operator-induced",
}
_JSON_TO_KIND = {v: k for k, v in _KIND_TO_JSON.items()}


def filtration_from_dict(d: dict) -> CoarseFiltration:
    kind = _JSON_TO_KIND.get(d["kind"])
    if kind is None:
        raise ValueError(f"unknown filtration kind {d['kind']!r}")
    g = d["generator"]
    gen = Relation.from_pairs(g["size"], g["pairs"])
    base = d.get("filter_base")
    return CoarseFiltration(
        gen,
        kind=kind,
        max_level=int(d.get("max_level", DEFAULT_MAX_LEVEL)),
        filter_base=tuple(frozenset(b) for b in base) if base is not None else None,
        fiber=d.get("fiber"),
    )


def _hop_distances(gen: Relation) -> np.ndarray:
    d = shortest_path(gen.matrix.astype(np.float64), method="D", directed=True, unweighted=True)
    out = np.full(d.shape, UNREACHABLE, dtype=np.int64)
    finite = np.isfinite(d)
    out[finite] = d[finite].astype(np.int64)
    return out


def _cached_distances(gen: Relation) -> np.ndarray:
    root = os.environ.get(CACHE_ENV)
    if not root:
        return _hop_distances(gen)
    h = hashlib.sha256()
    h.update(str(gen.size).encode())
    h.update(gen.array.tobytes())
    path = os.path.join(root, f"dist-{h.hexdigest()[:32]}.npy")
    if os.path.exists(path):
        return np.load(path)
    d = _hop_distances(gen)
    os.makedirs(root, exist_ok=True)
    tmp = f"{path}.{os.getpid()}.{threading.get_ident()}.tmp"
    with open(tmp, "wb") as fh:
        np.save(fh, d)
    os.replace(tmp, path)
    return d


def level(filtration: CoarseFiltration, k: int) -> Relation:
    """``level(0) = diagonal``, ``level(k + 1) = level(k) o generator``; cached."""
    if k < 0 or k > filtration.max_level:
        raise ValueError(f"level {k} outside 0..{filtration.max_level}")
    levels = filtration._levels
    with filtration._lock:
        if not levels:
            levels.append(diagonal(filtration.ground))
        while len(levels) <= k:
            prev = levels[-1]
            nxt = compose(prev, filtration.generator)
            levels.append(prev if nxt.pairs == prev.pairs else nxt)
        return levels[k]


def membership_level(e: Relation, filtration: CoarseFiltration) -> MembershipCertificate:
    """Minimal ``k <= max_level`` with ``e`` inside ``level(k)``, else a refusal."""
    if e.size != filtration.size:
        raise ValueError("relation and filtration live on different ground sets")
    if not e.pairs:
        return MembershipCertificate(True, level=0)
    d = filtration.distances()
    a = e.array
    dd = d[a[:, 0], a[:, 1]]
    K = filtration.max_level
    bad = np.nonzero((dd < 0) | (dd > K))[0]
    if len(bad):
        # report an unreachable pair first, then the farthest one
        unreachable = bad[dd[bad] < 0]
        i = unreachable[0] if len(unreachable) else bad[np.argmax(dd[bad])]
        w = (int(a[i, 0]), int(a[i, 1]))
        why = "pair joins different components" if dd[i] < 0 else f"pair needs level {int(dd[i])} > {K}"
        return MembershipCertificate(False, witness=w, reason=why)
    return MembershipCertificate(True, level=int(dd.max()))


def filter_membership(e: Relation, filtration: CoarseFiltration) -> MembershipCertificate:
    """Membership in the filter-restricted structure ``{E : E metric-bounded, S(E) in filter}``.

    ``e`` must sit in some level ``<= max_level`` of the underlying metric
    filtration and its splitting set must contain a base element.
    """
    if filtration.kind != "filter-restricted":
        raise ValueError("filter_membership needs a filter-restricted filtration")
    metric = membership_level(e, filtration)
    split = splitting_points(e)
    if not metric.contained:
        return MembershipCertificate(
            False, witness=metric.witness, splitting=split, reason="metric: " + metric.reason
        )
    for i, b in enumerate(filtration.filter_base):
        if b <= split:
            return MembershipCertificate(True, level=metric.level, splitting=split, base_index=i)
    # smallest base element, to make the witness reproducible
    i = min(range(len(filtration.filter_base)), key=lambda j: (len(filtration.filter_base[j]), j))
    missing = sorted(filtration.filter_base[i] - split)
    return MembershipCertificate(
        False,
        level=metric.level,
        splitting=split,
        base_index=i,
        reason=f"splitting set misses {missing[:8]} of base[{i}]",
    )


# constructors

def metric_filtration(points, radius: float = 1.0, *, explicit: bool = False,
                      max_level: int = DEFAULT_MAX_LEVEL) -> CoarseFiltration:
    """Generator: all pairs at distance ``<= radius``."""
    from .relations import metric_entourage

    return CoarseFiltration(metric_entourage(points, radius, explicit=explicit),
                            kind="metric", max_level=max_level)


def line_filtration(n: int, radius: int = 1, *, max_level: int = DEFAULT_MAX_LEVEL) -> CoarseFiltration:
    """``{0, ..., n-1}`` on the line, generated by the radius-``radius`` band."""
    return CoarseFiltration(band(n, radius), kind="metric", max_level=max_level)


def group_filtration(group: Group, s: Iterable[int], *, max_level: int = DEFAULT_MAX_LEVEL) -> CoarseFiltration:
    return CoarseFiltration(group_entourage(group, s), kind="group", max_level=max_level)


def filter_filtration(n: int, base: Sequence[Iterable[int]], *, radius: int = 1,
                      max_level: int = DEFAULT_MAX_LEVEL) -> CoarseFiltration:
    """Standard metric structure on ``{0..n-1}`` restricted by a filter base."""
    return CoarseFiltration(
        band(n, radius),
        kind="filter-restricted",
        max_level=max_level,
        filter_base=tuple(frozenset(b) for b in base),
    )


def explicit_filtration(generator: Relation, *, max_level: int = DEFAULT_MAX_LEVEL) -> CoarseFiltration:
    return CoarseFiltration(generator, kind="explicit", max_level=max_level)


def amplify(filtration: CoarseFiltration, n: int) -> CoarseFiltration:
    """Filtration on ``Y x {0..n-1}`` generated by the preimage of the ``Y`` generator.

    Point ``(y, i)`` has index ``y * n + i``.
    """
    if n < 1:
        raise ValueError("amplification factor must be >= 1")
    base = filtration.generator
    size = filtration.size * n
    a = base.array
    fib = np.arange(n)
    ii, jj = np.meshgrid(fib, fib, indexing="ij")
    ii, jj = ii.ravel(), jj.ravel()
    rows = (a[:, 0, None] * n + ii[None, :]).ravel()
    cols = (a[:, 1, None] * n + jj[None, :]).ravel()
    gen = Relation(GroundSet(size), frozenset(zip(rows.tolist(), cols.tolist())))
    return CoarseFiltration(gen, kind="amplified", max_level=filtration.max_level, fiber=n)


def structure_from_operators(ops: Sequence[SparseOperator], eps: float,
                             max_level: int = DEFAULT_MAX_LEVEL, ground=None) -> CoarseFiltration:
    """Generator: the union of thresholded supports ``{(x, y) : |a_{yx}| > eps}``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if ground is None:
        if not ops:
            raise ValueError("empty operator list needs an explicit ground set")
        ground = ops[0].domain
    ground = _as_ground(ground)
    if ground.size < 1:
        raise ValueError("empty ground set")
    rels = [diagonal(ground)]
    for op in ops:
        if op.shape != (ground.size, ground.size):
            raise ValueError("operators must share the ground set")
        rels.append(Relation(ground, support(op, eps).pairs))
    return CoarseFiltration(union(*rels), kind="operator-induced", max_level=max_level)
