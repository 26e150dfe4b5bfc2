"""Graph combinatorics used by the recovery pipeline.

* decomposition of a relation into graphs of partial bijections (bipartite
  edge colouring with the maximum section size as number of colours),
* greedy vertex colouring of bounded-degree graphs,
* Hall selectors (systems of distinct representatives) through maximum
  bipartite matching, with a deficiency witness when none exists,
* the four-condition partition of thresholded locator data.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

from .relations import Relation, section_bounds

__all__ = [
    "PartialBijection",
    "Coloring",
    "DegreeBoundError",
    "SelectorResult",
    "ClaimPartition",
    "decompose_partial_bijections",
    "greedy_coloring",
    "maximum_matching",
    "hall_selector",
    "claim_partitions",
    "verify_claim_partition",
]


@dataclass(frozen=True)
class PartialBijection:
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        xs = [p[0] for p in self.pairs]
        ys = [p[1] for p in self.pairs]
        if len(set(xs)) != len(xs) or len(set(ys)) != len(ys):
            raise ValueError("pairs do not form a partial bijection")

    def __len__(self):
        return len(self.pairs)

    def as_dict(self) -> dict[int, int]:
        return dict(self.pairs)


def decompose_partial_bijections(e: Relation, *, greedy: bool = False) -> list[PartialBijection]:
    """Split ``e`` into disjoint graphs of partial bijections.

    The default colours the bipartite graph ``rows -> cols`` with exactly
    ``max(section_bounds(e))`` colours by flipping two-coloured alternating
    paths (Konig's edge-colouring theorem).  ``greedy=True`` uses first-fit
    colouring instead, which may need up to ``2 * bound - 1`` pieces.
    """
    if not e.pairs:
        return []
    edges = sorted(e.pairs)
    if greedy:
        colour_of = _greedy_edge_colouring(edges)
    else:
        colour_of = _konig_edge_colouring(edges, max(section_bounds(e)))
    pieces: dict[int, list] = defaultdict(list)
    for edge in edges:
        pieces[colour_of[edge]].append(edge)
    return [PartialBijection(tuple(pieces[c])) for c in sorted(pieces)]


def _greedy_edge_colouring(edges):
    at_left: dict[int, set] = defaultdict(set)
    at_right: dict[int, set] = defaultdict(set)
    colour_of = {}
    for u, v in edges:
        c = 0
        while c in at_left[u] or c in at_right[v]:
            c += 1
        colour_of[(u, v)] = c
        at_left[u].add(c)
        at_right[v].add(c)
    return colour_of


def _konig_edge_colouring(edges, degree):
    # left[u][c] = v and right[v][c] = u for a coloured edge (u, v) of colour c
    left: dict[int, dict] = defaultdict(dict)
    right: dict[int, dict] = defaultdict(dict)

    def free(side, node):
        used = side[node]
        c = 0
        while c in used:
            c += 1
        return c

    for u, v in edges:
        a = free(left, u)
        b = free(right, v)
        if a not in right[v]:
            c = a
        else:
            # walk v -a- u1 -b- v2 -a- ... and swap a <-> b along it; in a
            # bipartite graph the walk cannot end at u, so a becomes free at v
            path = []
            node, on_right, col = v, True, a
            while True:
                side = right if on_right else left
                nxt = side[node].get(col)
                if nxt is None:
                    break
                path.append((nxt, node, col) if on_right else (node, nxt, col))
                node, on_right = nxt, not on_right
                col = b if col == a else a
            for lu, rv, col in path:
                del left[lu][col]
                del right[rv][col]
            for lu, rv, col in path:
                other = b if col == a else a
                left[lu][other] = rv
                right[rv][other] = lu
            c = a
        assert c < degree
        left[u][c] = v
        right[v][c] = u
    return {(u, v): c for u, cs in left.items() for c, v in cs.items()}


@dataclass(frozen=True)
class Coloring:
    color: tuple[int, ...]
    num_colors: int

    def classes(self) -> list[list[int]]:
        out = [[] for _ in range(self.num_colors)]
        for v, c in enumerate(self.color):
            out[c].append(v)
        return out


class DegreeBoundError(ValueError):
    def __init__(self, vertex: int, degree: int, bound: int):
        super().__init__(f"vertex {vertex} has degree {degree}, not below the bound {bound}")
        self.vertex = vertex
        self.degree = degree
        self.bound = bound


def _adjacency(num_vertices: int, edges: Iterable[Sequence[int]]) -> list[set]:
    adj = [set() for _ in range(num_vertices)]
    for u, v in edges:
        if u == v:
            continue
        adj[u].add(v)
        adj[v].add(u)
    return adj


def greedy_coloring(num_vertices: int, edges: Iterable[Sequence[int]],
                    degree_bound: int | None = None) -> Coloring:
    """First-fit colouring in vertex order.

    With ``degree_bound=n`` every vertex must have degree ``< n`` (else
    ``DegreeBoundError``) and at most ``n`` colours are used.
    """
    adj = _adjacency(num_vertices, edges)
    if degree_bound is not None:
        for v, nb in enumerate(adj):
            if len(nb) >= degree_bound:
                raise DegreeBoundError(v, len(nb), degree_bound)
    color = [-1] * num_vertices
    for v in range(num_vertices):
        taken = {color[w] for w in adj[v] if color[w] >= 0}
        c = 0
        while c in taken:
            c += 1
        color[v] = c
    return Coloring(tuple(color), max(color) + 1 if color else 0)


def maximum_matching(adjacency: Sequence[Sequence[Hashable]]) -> dict[int, Hashable]:
    """Maximum matching of left vertices ``0..L-1`` into right vertices.

    Augmenting paths are found by iterative depth-first search; neighbours are
    tried in sorted order, so results are deterministic.
    """
    adj = [sorted(set(nb)) for nb in adjacency]
    match_left: dict[int, Hashable] = {}
    match_right: dict[Hashable, int] = {}
    for root in range(len(adj)):
        # stack of (left vertex, iterator position); parent links rebuild the path
        seen = set()
        parent: dict[Hashable, int] = {}
        stack = [(root, 0)]
        found = None
        while stack and found is None:
            u, i = stack.pop()
            while i < len(adj[u]):
                v = adj[u][i]
                i += 1
                if v in seen:
                    continue
                seen.add(v)
                parent[v] = u
                if v not in match_right:
                    found = v
                    break
                stack.append((u, i))
                stack.append((match_right[v], 0))
                break
        if found is None:
            continue
        v = found
        while True:
            u = parent[v]
            prev = match_left.get(u)
            match_left[u] = v
            match_right[v] = u
            if u == root:
                break
            v = prev
    return match_left


@dataclass(frozen=True)
class SelectorResult:
    """Either an injective selector or a Hall-deficient subfamily."""

    selector: dict | None = None
    deficiency_witness: tuple[int, ...] | None = None

    @property
    def ok(self) -> bool:
        return self.selector is not None


def hall_selector(family: Sequence[Iterable[Hashable]]) -> SelectorResult:
    """Pick distinct ``g(i) in family[i]`` for every ``i``, or prove it impossible.

    When no selector exists the result carries indices ``F`` of a subfamily
    with ``|F| > |union of F|``, read off the alternating tree grown from an
    unmatched set.
    """
    sets = [frozenset(s) for s in family]
    match = maximum_matching(sets)
    if len(match) == len(sets):
        return SelectorResult(selector={i: match[i] for i in range(len(sets))})
    root = min(i for i in range(len(sets)) if i not in match)
    owner = {v: u for u, v in match.items()}
    reached_left = {root}
    queue = deque([root])
    seen_right = set()
    while queue:
        u = queue.popleft()
        for v in sets[u]:
            if v in seen_right:
                continue
            seen_right.add(v)
            w = owner[v]  # matched, otherwise the matching was not maximum
            if w not in reached_left:
                reached_left.add(w)
                queue.append(w)
    return SelectorResult(deficiency_witness=tuple(sorted(reached_left)))


# partition of thresholded locator data


@dataclass(frozen=True)
class ClaimPartition:
    """Partitions of ``A = union_x Y_x x Y_x`` (``B_pieces``), of ``X`` and of ``Y``.

    ``bounds`` holds the piece-count ceilings implied by the colouring degrees:
    ``B <= n^3 + 2n^2 - 2`` and ``X, Y <= m^2`` where ``n`` bounds the
    delta-locators and ``m`` the eta-locators.
    """

    B_pieces: tuple[Relation, ...]
    X_pieces: tuple[tuple[int, ...], ...]
    Y_pieces: tuple[tuple[int, ...], ...]
    delta: float
    eta: float
    bounds: tuple[int, int, int]

    @property
    def counts(self) -> tuple[int, int, int]:
        return len(self.B_pieces), len(self.X_pieces), len(self.Y_pieces)


def _clique_edges(groups: Iterable[Sequence[int]]):
    edges = set()
    for g in groups:
        g = sorted(g)
        for i in range(len(g)):
            for j in range(i + 1, len(g)):
                edges.add((g[i], g[j]))
    return edges


def _colour_classes(num_vertices, edges):
    if num_vertices == 0:
        return []
    col = greedy_coloring(num_vertices, edges)
    return [tuple(c) for c in col.classes()]


def locator_union(y_sets: Sequence[Iterable[int]], ny: int) -> Relation:
    """``A = union_x Y_x x Y_x`` as a relation on ``{0..ny-1}``."""
    pairs = set()
    for s in y_sets:
        s = list(s)
        pairs.update((a, b) for a in s for b in s)
    return Relation.from_pairs(ny, pairs)


def claim_partitions(locators, delta: float, eta: float) -> ClaimPartition:
    """Build the four-condition partitions from locator data.

    ``locators.sets(t)`` must return ``(Y_of, X_of)`` at threshold ``t``.
    Requires ``0 < eta <= delta``.
    """
    if not 0 < eta <= delta:
        raise ValueError("need 0 < eta <= delta")
    y_d, x_d = locators.sets(delta)
    y_e, x_e = locators.sets(eta)
    nx, ny = len(y_d), len(x_d)
    n = max([len(s) for s in y_d] + [len(s) for s in x_d] + [0])
    m = max([len(s) for s in y_e] + [len(s) for s in x_e] + [0])
    bounds = (max(n ** 3 + 2 * n ** 2 - 2, 1), max(m ** 2, 1), max(m ** 2, 1))

    a = locator_union(y_d, ny)
    verts = sorted(a.pairs)
    index = {p: i for i, p in enumerate(verts)}
    by_row: dict[int, list] = defaultdict(list)
    by_col: dict[int, list] = defaultdict(list)
    for i, (p, q) in enumerate(verts):
        by_row[p].append(i)
        by_col[q].append(i)
    blocks = [[index[(p, q)] for p in s for q in s] for s in y_d]
    edges = _clique_edges(list(by_row.values()) + list(by_col.values()) + blocks)
    b_pieces = tuple(
        Relation.from_pairs(ny, (verts[i] for i in cls)) for cls in _colour_classes(len(verts), edges)
    )
    # x ~ x' iff Y_{x,eta} and Y_{x',eta} meet, i.e. both lie in some X_{y,eta}
    x_pieces = tuple(_colour_classes(nx, _clique_edges(x_e)))
    y_pieces = tuple(_colour_classes(ny, _clique_edges(y_e)))
    return ClaimPartition(b_pieces, x_pieces, y_pieces, float(delta), float(eta), bounds)


def verify_claim_partition(part: ClaimPartition, locators) -> list[str]:
    """Check the four conditions directly; returns a list of violations (empty if valid).

    1. every horizontal and vertical section of each B piece has at most one point;
    2. ``(Y_x x Y_x) & B_i`` has at most one pair for every ``x`` and ``i``;
    3. distinct ``x, x'`` in one X piece have disjoint ``Y_{x,eta}``, ``Y_{x',eta}``;
    4. distinct ``y, y'`` in one Y piece have disjoint ``X_{y,eta}``, ``X_{y',eta}``.
    """
    y_d, x_d = locators.sets(part.delta)
    y_e, x_e = locators.sets(part.eta)
    nx, ny = len(y_d), len(x_d)
    problems = []

    a = locator_union(y_d, ny)
    seen: set = set()
    for i, b in enumerate(part.B_pieces):
        if seen & b.pairs:
            problems.append(f"B[{i}] overlaps an earlier piece")
        seen |= b.pairs
        rows, cols = section_bounds(b)
        if rows > 1 or cols > 1:
            problems.append(f"(1) B[{i}] has a section of size {max(rows, cols)}")
        for x, s in enumerate(y_d):
            hit = sum(1 for p in s for q in s if (p, q) in b.pairs)
            if hit > 1:
                problems.append(f"(2) B[{i}] meets Y_{x} x Y_{x} in {hit} pairs")
    if seen != a.pairs:
        problems.append("B pieces do not cover A exactly")

    for name, pieces, size, loc, cond in (
        ("X", part.X_pieces, nx, y_e, "(3)"),
        ("Y", part.Y_pieces, ny, x_e, "(4)"),
    ):
        flat = [v for p in pieces for v in p]
        if sorted(flat) != list(range(size)):
            problems.append(f"{name} pieces do not partition 0..{size - 1}")
        for j, piece in enumerate(pieces):
            for s in range(len(piece)):
                for t in range(s + 1, len(piece)):
                    u, w = piece[s], piece[t]
                    if set(loc[u]) & set(loc[w]):
                        problems.append(f"{cond} {name}[{j}] holds {u}, {w} with overlapping locators")
    return problems
