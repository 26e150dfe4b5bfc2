"""Ghost profiles, operator-norm localization probes and property A witnesses."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .filtration import CoarseFiltration, level
from .operators import SparseOperator, random_operator, spectral_norm

__all__ = [
    "GhostProfile",
    "ghost_profile",
    "ONLReport",
    "onl_probe",
    "localized_ratio",
    "propertyA_witness_check",
    "ONL_SLACK",
]

# the localization inequality is strict; at floating point we accept >= minus this
ONL_SLACK = 1e-9


@dataclass(frozen=True)
class GhostProfile:
    """``eps[m] = max |<a delta_x, delta_y>|`` over pairs outside ``A_m x A_m``."""

    exhaustion: tuple[frozenset, ...]
    eps: tuple[float, ...]


def ghost_profile(a: SparseOperator, exhaustion: Sequence) -> GhostProfile:
    sets = tuple(frozenset(int(i) for i in s) for s in exhaustion)
    for prev, nxt in zip(sets, sets[1:]):
        if not prev <= nxt:
            raise ValueError("exhaustion must be increasing")
    m = a.matrix.tocoo()
    mags = np.abs(m.data)
    eps = []
    for s in sets:
        inside = np.zeros(max(a.shape), dtype=bool)
        if s:
            inside[list(s)] = True
        outside = ~(inside[m.row] & inside[m.col])
        eps.append(float(mags[outside].max()) if outside.any() else 0.0)
    return GhostProfile(sets, tuple(eps))


def _balls(filtration: CoarseFiltration, k: int) -> list[tuple[int, tuple[int, ...]]]:
    """Distinct level-``k`` balls ``{y : (x, y) in level(k)}`` with a centre each."""
    lev = level(filtration, k)
    mat = lev.matrix
    seen = {}
    for x in range(filtration.size):
        b = tuple(mat.indices[mat.indptr[x]:mat.indptr[x + 1]].tolist())
        seen.setdefault(b, x)
    return [(x, b) for b, x in seen.items()]


def localized_ratio(a: SparseOperator, filtration: CoarseFiltration, k: int,
                    norm: float | None = None):
    """Best ``||a chi_B|| / ||a||`` over level-``k`` balls ``B``.

    Returns ``(ratio, centre, xi)`` where ``xi`` is the top right singular vector
    of ``a chi_B`` (a unit vector supported in ``B``) attaining the ratio.
    """
    dense = a.toarray()
    if norm is None:
        norm = spectral_norm(a)
    n = a.shape[1]
    if norm == 0.0:
        xi = np.zeros(n, dtype=complex)
        xi[0] = 1.0
        return 1.0, 0, xi
    gram = dense.conj().T @ dense
    best, best_x, best_b = -1.0, 0, None
    for x, b in _balls(filtration, k):
        idx = np.array(b)
        lam = np.linalg.eigvalsh(gram[np.ix_(idx, idx)])[-1]
        val = np.sqrt(max(lam, 0.0))
        if val > best:
            best, best_x, best_b = val, x, idx
    _, _, vh = np.linalg.svd(dense[:, best_b], full_matrices=False)
    xi = np.zeros(n, dtype=complex)
    xi[best_b] = vh[0].conj()
    xi /= np.linalg.norm(xi)
    return float(min(best / norm, 1.0)), int(best_x), xi


@dataclass
class ONLReport:
    """Result of an operator-norm localization probe.

    ``k`` is the ball radius found (``None`` on refusal); witnesses are
    supported in level-``k`` balls, hence ``level(2k)``-bounded, recorded as
    ``bounding_level``.  ``ratios[i][j]`` is sample ``i``'s best ratio at radius ``j``.
    """

    e_level: int
    m: float
    k: int | None
    bounding_level: int | None
    worst_ratio: float
    ratios: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)
    worst_sample: int | None = None
    seed: int = 0

    @property
    def passed(self) -> bool:
        return self.k is not None

    def to_dict(self) -> dict:
        return {
            "e_level": self.e_level,
            "m": self.m,
            "k": self.k,
            "bounding_level": self.bounding_level,
            "worst_ratio": self.worst_ratio,
            "ratios": [[float(r) for r in row] for row in self.ratios],
            "witness_centres": [int(c) for c, _ in self.witnesses],
            "worst_sample": self.worst_sample,
            "seed": self.seed,
        }


def onl_probe(filtration: CoarseFiltration, e_level: int, m: float, num_samples: int,
              seed: int = 0, *, max_k: int | None = None,
              operators: Sequence[SparseOperator] | None = None,
              full_table: bool = False) -> ONLReport:
    """Search the smallest ball radius ``k`` at which every sample localizes.

    Samples are complex Gaussian operators supported on ``level(e_level)``; the
    generator for sample ``i`` is seeded with ``(seed, i)``.  Pass ``operators``
    to probe a fixed list instead.  With ``full_table`` the ratio table is
    filled up to ``max_k`` even after success.
    """
    if m <= 0:
        raise ValueError("m must be positive")
    cap = filtration.max_level if max_k is None else min(max_k, filtration.max_level)
    if e_level > filtration.max_level:
        raise ValueError("e_level exceeds the filtration cap")
    if operators is None:
        rel = level(filtration, e_level)
        operators = [random_operator(rel, np.random.default_rng([seed, i])) for i in range(num_samples)]
    target = 1.0 - 1.0 / m - ONL_SLACK
    norms = [spectral_norm(a) for a in operators]
    ratios = [[] for _ in operators]
    found = None
    found_wit = None
    for k in range(cap + 1):
        wit = []
        for i, a in enumerate(operators):
            r, c, xi = localized_ratio(a, filtration, k, norms[i])
            ratios[i].append(r)
            wit.append((c, xi))
        if found is None and all(row[k] >= target for row in ratios):
            found, found_wit = k, wit
            if not full_table:
                break
    last = found if found is not None else len(ratios[0]) - 1 if ratios else 0
    col = [row[last] for row in ratios] if ratios else [1.0]
    worst = int(np.argmin(col)) if ratios else None
    return ONLReport(
        e_level=e_level,
        m=m,
        k=found,
        bounding_level=None if found is None else 2 * found,
        worst_ratio=float(min(col)),
        ratios=ratios,
        witnesses=found_wit if found_wit is not None else [],
        worst_sample=worst,
        seed=seed,
    )


def propertyA_witness_check(filtration: CoarseFiltration, e_level: int, m: float,
                            f_level: int, xi) -> bool:
    """Check a candidate family ``x -> xi_x`` against the property A conditions.

    1. ``||xi_x|| = 1`` (to 1e-12);
    2. ``supp(xi_x)`` lies in ``{x' : (x, x') in level(f_level)}``;
    3. ``||xi_x - xi_x'|| < 1/m`` whenever ``(x, x') in level(e_level)``.

    ``xi`` is a mapping ``x -> vector`` or an array whose row ``x`` is ``xi_x``.
    """
    n = filtration.size
    if isinstance(xi, Mapping):
        vecs = np.array([np.asarray(xi[x]) for x in range(n)])
    else:
        vecs = np.asarray(xi)
    if vecs.shape != (n, n):
        raise ValueError(f"expected {n} vectors of length {n}")
    if np.any(np.abs(np.linalg.norm(vecs, axis=1) - 1.0) > 1e-12):
        return False
    allowed = level(filtration, f_level).matrix.toarray()
    if np.any((vecs != 0) & ~allowed):
        return False
    e = level(filtration, e_level).array
    if len(e):
        diffs = np.linalg.norm(vecs[e[:, 0]] - vecs[e[:, 1]], axis=1)
        if np.any(diffs >= 1.0 / m):
            return False
    return True
