"""Recovering a coarse equivalence from an isometry between Roe truncations.

Given an isometry ``U : l2(X) -> l2(Y)`` (so that ``Phi(a) = U a U*``), the
locator sets are

    Y_{x,delta} = {y : ||Phi(e_xx) e_yy Phi(1)|| > delta},
    X_{y,delta} = {x : ||Psi(e_yy) e_xx|| > delta},      Psi(b) = U* b U.

Both norms are of rank-one operators and equal ``|U[y, x]| * ||U* delta_y||``,
so locators are thresholded, rescaled entries of ``U``.  Selectors from the
locators (Hall matchings when injectivity is required) give maps ``f`` and
``g`` whose distortion and mutual closeness are certified level by level.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .combinatorics import claim_partitions, hall_selector, locator_union, verify_claim_partition
from .filtration import CoarseFiltration, MembershipCertificate, membership_level
from .operators import SparseOperator, spectral_norm
from .relations import GroundSet, Relation

__all__ = [
    "IsometryData",
    "Locators",
    "ConcentrationReport",
    "DistortionReport",
    "RecoveredEquivalence",
    "PipelineConfig",
    "RecoveryError",
    "check_isometry",
    "locator_values",
    "locator_value_bruteforce",
    "locator_sets",
    "concentration_check",
    "entourage_union_level",
    "recover_maps",
    "cantor_bernstein",
    "verify_coarse_expanding",
    "closeness_level",
    "embed_from_map",
    "full_pipeline",
]

UNDEFINED = -1


class RecoveryError(Exception):
    """A pipeline stage could not produce its output; ``details`` is JSON-ready."""

    def __init__(self, stage: str, message: str, details: dict | None = None):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.message = message
        self.details = details or {}


def _dense(u) -> np.ndarray:
    if isinstance(u, SparseOperator):
        return u.toarray()
    if sp.issparse(u):
        return u.toarray()
    return np.asarray(u, dtype=np.complex128)


def check_isometry(u, tol: float = 1e-10) -> bool:
    """``||U* U - I|| <= tol``."""
    m = u.matrix if isinstance(u, SparseOperator) else sp.csr_array(u, dtype=np.complex128)
    rows, cols = m.shape
    if rows < cols:
        return False
    defect = (m.conj().T @ m) - sp.identity(cols, dtype=np.complex128, format="csr")
    return spectral_norm(defect) <= tol


@dataclass(frozen=True, eq=False)
class IsometryData:
    """An isometry ``U`` from ``l2(source)`` to ``l2(target)`` plus both structures."""

    U: SparseOperator
    source: CoarseFiltration | None = None
    target: CoarseFiltration | None = None
    tol: float = 1e-10

    def __post_init__(self):
        u = self.U if isinstance(self.U, SparseOperator) else SparseOperator(self.U)
        object.__setattr__(self, "U", u)
        ny, nx = u.shape
        if self.source is not None and self.source.size != nx:
            raise ValueError(f"U has {nx} columns but the source has {self.source.size} points")
        if self.target is not None and self.target.size != ny:
            raise ValueError(f"U has {ny} rows but the target has {self.target.size} points")

    @property
    def nx(self) -> int:
        return self.U.shape[1]

    @property
    def ny(self) -> int:
        return self.U.shape[0]

    def is_isometry(self) -> bool:
        return check_isometry(self.U, self.tol)

    def is_surjective(self) -> bool:
        """Whether ``U`` is unitary, i.e. ``Phi`` is onto rather than onto a corner."""
        return self.ny == self.nx and check_isometry(self.U.adjoint(), self.tol)

    def phi(self, a: SparseOperator) -> SparseOperator:
        return self.U @ a @ self.U.adjoint()

    def psi(self, b: SparseOperator) -> SparseOperator:
        return self.U.adjoint() @ b @ self.U


def locator_values(iso: IsometryData) -> sp.csr_array:
    """``V[y, x] = |U[y, x]| * ||U* delta_y||`` on the sparsity pattern of ``U``."""
    m = iso.U.matrix.tocsr()
    row_norms = np.sqrt(np.asarray((abs(m) ** 2).sum(axis=1)).ravel())
    coo = m.tocoo()
    vals = np.abs(coo.data) * row_norms[coo.row]
    return sp.csr_array((vals, (coo.row, coo.col)), shape=m.shape)


def locator_value_bruteforce(iso: IsometryData, x: int, y: int) -> tuple[float, float]:
    """Both locator norms from full matrix products, for cross-checking.

    Returns ``(||Phi(e_xx) e_yy Phi(1)||, ||Psi(e_yy) e_xx||)``.
    """
    u = _dense(iso.U)
    ny, nx = u.shape
    exx = np.zeros((nx, nx), dtype=complex)
    exx[x, x] = 1.0
    eyy = np.zeros((ny, ny), dtype=complex)
    eyy[y, y] = 1.0
    uh = u.conj().T
    phi_exx = u @ exx @ uh
    phi_one = u @ uh
    psi_eyy = uh @ eyy @ u
    return (
        float(np.linalg.norm(phi_exx @ eyy @ phi_one, 2)),
        float(np.linalg.norm(psi_eyy @ exx, 2)),
    )


@dataclass(frozen=True, eq=False)
class Locators:
    """Locator sets at threshold ``delta``; ``values`` allows re-thresholding."""

    delta: float
    Y_of: tuple[tuple[int, ...], ...]
    X_of: tuple[tuple[int, ...], ...]
    values: sp.csr_array

    @classmethod
    def from_values(cls, values: sp.csr_array, delta: float) -> "Locators":
        y_of, x_of = _threshold(values, delta)
        return cls(float(delta), y_of, x_of, values)

    def sets(self, t: float):
        if t == self.delta:
            return self.Y_of, self.X_of
        return _threshold(self.values, t)

    def at(self, t: float) -> "Locators":
        return Locators.from_values(self.values, t)

    @property
    def max_sizes(self) -> tuple[int, int]:
        return (max((len(s) for s in self.Y_of), default=0),
                max((len(s) for s in self.X_of), default=0))

    def union_relation(self) -> Relation:
        """``A_delta = union_x Y_x x Y_x`` on the target."""
        return locator_union(self.Y_of, len(self.X_of))

    def source_union_relation(self) -> Relation:
        """``union_y X_y x X_y`` on the source."""
        return locator_union(self.X_of, len(self.Y_of))


def _threshold(values: sp.csr_array, t: float):
    ny, nx = values.shape
    coo = values.tocoo()
    keep = coo.data > t
    rows, cols = coo.row[keep], coo.col[keep]
    y_of = [[] for _ in range(nx)]
    x_of = [[] for _ in range(ny)]
    for y, x in sorted(zip(rows.tolist(), cols.tolist())):
        x_of[y].append(x)
        y_of[x].append(y)
    for s in y_of:
        s.sort()
    return tuple(tuple(s) for s in y_of), tuple(tuple(s) for s in x_of)


def locator_sets(iso: IsometryData, delta: float, *, bruteforce: bool = False) -> Locators:
    """``Y_{x,delta}`` for every ``x`` and ``X_{y,delta}`` for every ``y``.

    ``bruteforce=True`` evaluates every norm from full matrix products instead
    of the rank-one closed form (cubic cost per pair; for oracle runs only).
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if bruteforce:
        vals = np.zeros((iso.ny, iso.nx))
        for y in range(iso.ny):
            for x in range(iso.nx):
                vals[y, x] = locator_value_bruteforce(iso, x, y)[0]
        values = sp.csr_array(vals)
    else:
        values = locator_values(iso)
    return Locators.from_values(values, delta)


@dataclass(frozen=True)
class ConcentrationReport:
    """Per-point tails ``||(1 - chi_{Y_{x,eta}}) Phi(e_xx)||`` and the mirrored ``y`` tails."""

    eta: float
    eps: float
    x_tails: tuple[float, ...]
    y_tails: tuple[float, ...]
    x_violators: tuple[int, ...]
    y_violators: tuple[int, ...]

    @property
    def passed(self) -> bool:
        return not self.x_violators and not self.y_violators

    def to_dict(self) -> dict:
        return {
            "eta": self.eta,
            "eps": self.eps,
            "passed": self.passed,
            "max_x_tail": max(self.x_tails, default=0.0),
            "max_y_tail": max(self.y_tails, default=0.0),
            "x_violators": list(self.x_violators),
            "y_violators": list(self.y_violators),
        }


def concentration_check(iso: IsometryData, eta: float, eps: float) -> ConcentrationReport:
    """Check that each ``Phi(e_xx)`` and ``Psi(e_yy)`` is concentrated on its locator.

    For rank-one ``Phi(e_xx) = u_x u_x*`` (``u_x`` the column ``U delta_x``),
    ``||(1 - chi_Y) Phi(e_xx)|| = ||(1 - chi_Y) u_x|| ||u_x||``; symmetrically with
    the rows ``U* delta_y`` for ``Psi(e_yy)``.
    """
    if eta <= 0 or eps <= 0:
        raise ValueError("eta and eps must be positive")
    values = locator_values(iso)
    m = iso.U.matrix.tocoo()
    sq = np.abs(m.data) ** 2
    coo = values.tocoo()
    # values share U's sparsity; align by sorting both on (row, col)
    order_u = np.lexsort((m.col, m.row))
    order_v = np.lexsort((coo.col, coo.row))
    outside = np.empty(len(sq), dtype=bool)
    outside[order_u] = coo.data[order_v] <= eta
    rows, cols = m.row, m.col
    col_total = np.bincount(cols, weights=sq, minlength=iso.nx)
    row_total = np.bincount(rows, weights=sq, minlength=iso.ny)
    col_out = np.bincount(cols[outside], weights=sq[outside], minlength=iso.nx)
    row_out = np.bincount(rows[outside], weights=sq[outside], minlength=iso.ny)
    x_tails = np.sqrt(np.clip(col_out, 0, None)) * np.sqrt(col_total)
    y_tails = np.sqrt(np.clip(row_out, 0, None)) * np.sqrt(row_total)
    return ConcentrationReport(
        float(eta),
        float(eps),
        tuple(float(t) for t in x_tails),
        tuple(float(t) for t in y_tails),
        tuple(int(i) for i in np.nonzero(x_tails >= eps)[0]),
        tuple(int(i) for i in np.nonzero(y_tails >= eps)[0]),
    )


def entourage_union_level(locators: Locators, target: CoarseFiltration) -> MembershipCertificate:
    """Minimal level of ``A_delta = union_x Y_x x Y_x`` in the target structure."""
    return membership_level(locators.union_relation(), target)


def _as_map(m, size: int | None = None) -> np.ndarray:
    if isinstance(m, dict):
        n = size if size is not None else (max(m) + 1 if m else 0)
        out = np.full(n, UNDEFINED, dtype=np.int64)
        for k, v in m.items():
            out[k] = v
        return out
    return np.asarray(m, dtype=np.int64)


def recover_maps(iso: IsometryData, delta: float, require_injective: bool = True,
                 locators: Locators | None = None):
    """Select ``f(x) in Y_{x,delta}`` and ``g(y) in X_{y,delta}``.

    With ``require_injective`` both selections are Hall matchings; otherwise the
    smallest index is taken.  ``f`` must be total: an empty ``Y_{x,delta}``
    raises ``RecoveryError``.  ``g`` is left undefined (``-1``) at points with
    empty ``X_{y,delta}``, which happens whenever ``U`` is not onto.
    """
    loc = locators if locators is not None else locator_sets(iso, delta)
    empty_x = [x for x, s in enumerate(loc.Y_of) if not s]
    if empty_x:
        raise RecoveryError("recover_maps", f"{len(empty_x)} source points have empty locators",
                            {"empty_x": empty_x})
    g = np.full(iso.ny, UNDEFINED, dtype=np.int64)
    dom_g = [y for y, s in enumerate(loc.X_of) if s]
    if require_injective:
        res = hall_selector(loc.Y_of)
        if not res.ok:
            raise RecoveryError("recover_maps", "no injective selector for f",
                                {"side": "f", "deficiency_witness": list(res.deficiency_witness)})
        f = np.array([res.selector[x] for x in range(iso.nx)], dtype=np.int64)
        res = hall_selector([loc.X_of[y] for y in dom_g])
        if not res.ok:
            witness = [dom_g[i] for i in res.deficiency_witness]
            raise RecoveryError("recover_maps", "no injective selector for g",
                                {"side": "g", "deficiency_witness": witness})
        for i, y in enumerate(dom_g):
            g[y] = res.selector[i]
    else:
        f = np.array([s[0] for s in loc.Y_of], dtype=np.int64)
        for y in dom_g:
            g[y] = loc.X_of[y][0]
    return f, g


def cantor_bernstein(f, g) -> np.ndarray:
    """Bijection ``h`` with ``h(x) in {f(x), g^{-1}(x)}`` from injections ``f``, ``g``.

    Each ``x`` is traced backwards through ``x <- g(y) <- f(x') <- ...``.  Chains
    that stop in ``X \\ g(Y)`` or close up into a cycle follow ``f``; chains that
    stop in ``Y \\ f(X)`` follow ``g^{-1}``.
    """
    f = _as_map(f)
    g = _as_map(g)
    nx, ny = len(f), len(g)
    for name, m, cod in (("f", f, ny), ("g", g, nx)):
        if np.any(m < 0) or np.any(m >= cod):
            raise ValueError(f"{name} is not a total map into the other set")
        if len(set(m.tolist())) != len(m):
            raise ValueError(f"{name} is not injective")
    f_inv = {int(v): i for i, v in enumerate(f)}
    g_inv = {int(v): i for i, v in enumerate(g)}
    h = np.empty(nx, dtype=np.int64)
    for x0 in range(nx):
        x = x0
        use_f = True
        while True:
            if x not in g_inv:
                break  # chain starts in X \ g(Y)
            y = g_inv[x]
            if y not in f_inv:
                use_f = False  # chain starts in Y \ f(X)
                break
            x = f_inv[y]
            if x == x0:
                break  # cycle
        h[x0] = f[x0] if use_f else g_inv[x0]
    return h


@dataclass(frozen=True)
class DistortionReport:
    """Level tables for a (possibly partial) map ``f``.

    ``forward[k]`` is the least ``k'`` with ``(f x f)[level_X(k)]`` inside
    ``level_Y(k')``; ``backward[k]`` the least ``k''`` with
    ``{(x, x') : (f x, f x') in level_Y(k)}`` inside ``level_X(k'')``.  ``None``
    marks a refusal; the first refusal on each side carries a witness pair.
    """

    forward: tuple
    backward: tuple
    forward_witness: tuple | None = None
    backward_witness: tuple | None = None

    @property
    def total(self) -> bool:
        return None not in self.forward and None not in self.backward

    def is_monotone(self) -> bool:
        for tab in (self.forward, self.backward):
            vals = [v for v in tab if v is not None]
            if any(b < a for a, b in zip(vals, vals[1:])):
                return False
            # refusals only at the tail
            if None in tab and any(v is not None for v in tab[tab.index(None):]):
                return False
        return True

    def to_dict(self) -> dict:
        return {
            "forward": list(self.forward),
            "backward": list(self.backward),
            "forward_witness": list(self.forward_witness) if self.forward_witness else None,
            "backward_witness": list(self.backward_witness) if self.backward_witness else None,
            "total": self.total,
        }


def _table(d_src, d_img, cap_img, kmax, dom):
    """``table[k] = max d_img`` over pairs with ``0 <= d_src <= k``; ``None`` past ``cap_img``."""
    table, witness = [], None
    bad = (d_img < 0) | (d_img > cap_img)
    for k in range(kmax + 1):
        sel = (d_src >= 0) & (d_src <= k)
        if np.any(sel & bad):
            if witness is None:
                i, j = np.argwhere(sel & bad)[0]
                witness = (k, int(dom[i]), int(dom[j]))
            table.append(None)
            continue
        table.append(int(d_img[sel].max()) if np.any(sel) else 0)
    return tuple(table), witness


def verify_coarse_expanding(f, source: CoarseFiltration, target: CoarseFiltration,
                            K: int) -> DistortionReport:
    """Forward (coarse) and backward (expanding) tables for ``k = 0..K``.

    ``f`` is an index array (``-1`` where undefined); only defined points count.
    Tables stop at the caps of the respective filtrations.
    """
    f = _as_map(f, source.size)
    if len(f) != source.size:
        raise ValueError("map length does not match the source")
    if np.any(f >= target.size):
        raise ValueError("map leaves the target")
    dom = np.nonzero(f >= 0)[0]
    img = f[dom]
    dx = source.distances()[np.ix_(dom, dom)]
    dy = target.distances()[np.ix_(img, img)]
    fwd, fw = _table(dx, dy, target.max_level, min(K, source.max_level), dom)
    bwd, bw = _table(dy, dx, source.max_level, min(K, target.max_level), dom)
    return DistortionReport(fwd, bwd, fw, bw)


def closeness_level(map1, map2, filtration: CoarseFiltration, K: int | None = None) -> MembershipCertificate:
    """Minimal level of ``{(map1(x), map2(x))}`` over points where both are defined."""
    a, b = _as_map(map1), _as_map(map2)
    if len(a) != len(b):
        raise ValueError("maps have different domains")
    both = (a >= 0) & (b >= 0)
    rel = Relation.from_pairs(filtration.size, zip(a[both].tolist(), b[both].tolist()))
    cert = membership_level(rel, filtration)
    if K is not None and cert.contained and cert.level > K:
        d = filtration.distances()
        i = int(np.argmax(d[a[both], b[both]]))
        w = (int(a[both][i]), int(b[both][i]))
        return MembershipCertificate(False, witness=w, reason=f"pair needs level {cert.level} > {K}")
    return cert


def embed_from_map(f, source: CoarseFiltration | None = None,
                   target: CoarseFiltration | None = None, target_size: int | None = None) -> IsometryData:
    """The 0/1 isometry ``U delta_x = delta_{f(x)}`` of an injective map."""
    f = _as_map(f)
    if np.any(f < 0):
        raise ValueError("map must be total")
    if len(set(f.tolist())) != len(f):
        raise ValueError("map is not injective")
    nx = len(f)
    ny = target.size if target is not None else (target_size if target_size is not None else int(f.max()) + 1)
    m = sp.csr_array((np.ones(nx, dtype=np.complex128), (f, np.arange(nx))), shape=(ny, nx))
    return IsometryData(SparseOperator(m, GroundSet(nx), GroundSet(ny)), source, target)


# orchestration


@dataclass(frozen=True)
class PipelineConfig:
    delta: float = 0.5
    eta: float | None = None
    eps: float = 0.4
    K: int = 16
    require_bijection: bool = True
    bruteforce: bool = False

    @property
    def eta_value(self) -> float:
        return self.delta if self.eta is None else self.eta

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "eta": self.eta_value,
            "eps": self.eps,
            "K": self.K,
            "require_bijection": self.require_bijection,
            "bruteforce": self.bruteforce,
        }


@dataclass
class RecoveredEquivalence:
    """Maps, certificates and a stage log from ``full_pipeline``.

    ``failed_stage`` is ``None`` on success; otherwise later fields stay empty.
    ``verdict`` is ``"coarse_equivalence"`` or ``"coarse_embedding"`` (when ``U``
    is not onto) if every certificate is finite, and ``"inconclusive"`` if not.
    """

    config: PipelineConfig
    f: np.ndarray | None = None
    g: np.ndarray | None = None
    h: np.ndarray | None = None
    locators: Locators | None = None
    concentration: ConcentrationReport | None = None
    distortion_f: DistortionReport | None = None
    distortion_g: DistortionReport | None = None
    closeness_gf: MembershipCertificate | None = None
    closeness_fg: MembershipCertificate | None = None
    entourage_target: MembershipCertificate | None = None
    entourage_source: MembershipCertificate | None = None
    partition: dict | None = None
    stages: list = field(default_factory=list)
    failed_stage: str | None = None
    verdict: str = "failed"

    @property
    def ok(self) -> bool:
        return self.failed_stage is None

    def log(self, stage: str, status: str, **detail):
        self.stages.append({"stage": stage, "status": status, **detail})

    def to_dict(self) -> dict:
        def arr(a):
            return None if a is None else [int(v) for v in a]

        def cert(c):
            return None if c is None else c.to_dict()

        loc = None
        if self.locators is not None:
            ys, xs = self.locators.max_sizes
            loc = {"delta": self.locators.delta, "max_Y": ys, "max_X": xs,
                   "empty_x": [x for x, s in enumerate(self.locators.Y_of) if not s],
                   "empty_y": [y for y, s in enumerate(self.locators.X_of) if not s]}
        return {
            "config": self.config.to_dict(),
            "maps": {"f": arr(self.f), "g": arr(self.g), "h": arr(self.h)},
            "locators": loc,
            "certificates": {
                "concentration": None if self.concentration is None else self.concentration.to_dict(),
                "distortion_f": None if self.distortion_f is None else self.distortion_f.to_dict(),
                "distortion_g": None if self.distortion_g is None else self.distortion_g.to_dict(),
                "closeness_gf": cert(self.closeness_gf),
                "closeness_fg": cert(self.closeness_fg),
                "entourage_target": cert(self.entourage_target),
                "entourage_source": cert(self.entourage_source),
                "partition": self.partition,
            },
            "stages": self.stages,
            "failed_stage": self.failed_stage,
            "verdict": self.verdict,
        }


def _compose_maps(outer: np.ndarray, inner: np.ndarray) -> np.ndarray:
    out = np.full(len(inner), UNDEFINED, dtype=np.int64)
    ok = inner >= 0
    out[ok] = outer[inner[ok]]
    return out


def full_pipeline(iso: IsometryData, config: PipelineConfig | None = None) -> RecoveredEquivalence:
    """Run every recovery stage in order and collect certificates.

    Stages: check_isometry, locator_sets, concentration_check, claim_partitions,
    recover_maps, cantor_bernstein, verify_coarse_expanding, closeness_level,
    entourage_union_level.  The first failing stage ends the run and is named
    in ``failed_stage``; nothing is silently replaced.
    """
    cfg = config or PipelineConfig()
    out = RecoveredEquivalence(cfg)
    if iso.source is None or iso.target is None:
        raise ValueError("full_pipeline needs source and target filtrations")

    def fail(stage, message, **detail):
        out.failed_stage = stage
        out.verdict = "failed"
        out.log(stage, "failed", message=message, **detail)
        return out

    if not iso.is_isometry():
        return fail("check_isometry", f"||U*U - I|| exceeds {iso.tol}")
    surjective = iso.is_surjective()
    out.log("check_isometry", "ok", surjective=surjective)

    loc = locator_sets(iso, cfg.delta, bruteforce=cfg.bruteforce)
    out.locators = loc
    ys, xs = loc.max_sizes
    out.log("locator_sets", "ok", max_Y=ys, max_X=xs)

    conc = concentration_check(iso, cfg.eta_value, cfg.eps)
    out.concentration = conc
    if not conc.passed:
        return fail("concentration_check", "locators do not capture the mass of Phi(e_xx) / Psi(e_yy)",
                    x_violators=list(conc.x_violators)[:20], y_violators=list(conc.y_violators)[:20])
    out.log("concentration_check", "ok")

    part = claim_partitions(loc, cfg.delta, cfg.eta_value)
    problems = verify_claim_partition(part, loc)
    out.partition = {"counts": list(part.counts), "bounds": list(part.bounds), "verified": not problems}
    if problems:
        return fail("claim_partitions", "partition violates its conditions", problems=problems[:20])
    out.log("claim_partitions", "ok", counts=list(part.counts))

    try:
        f, g = recover_maps(iso, cfg.delta, cfg.require_bijection, locators=loc)
    except RecoveryError as err:
        return fail(err.stage, err.message, **err.details)
    empty_y = [y for y, s in enumerate(loc.X_of) if not s]
    if surjective and empty_y:
        return fail("recover_maps", f"{len(empty_y)} target points have empty locators",
                    empty_y=empty_y[:50])
    out.f, out.g = f, g
    out.log("recover_maps", "ok", injective=cfg.require_bijection, g_defined=int(np.sum(g >= 0)))

    if cfg.require_bijection:
        if empty_y:
            out.log("cantor_bernstein", "skipped",
                    reason="g is only defined on the range of the corner; no bijection to build")
        elif iso.nx != iso.ny:
            out.log("cantor_bernstein", "skipped", reason="source and target sizes differ")
        else:
            out.h = cantor_bernstein(f, g)
            out.log("cantor_bernstein", "ok", h_equals_f=bool(np.array_equal(out.h, f)))
    else:
        out.log("cantor_bernstein", "skipped", reason="bijection not requested")

    out.distortion_f = verify_coarse_expanding(f, iso.source, iso.target, cfg.K)
    out.distortion_g = verify_coarse_expanding(g, iso.target, iso.source, cfg.K)
    out.log("verify_coarse_expanding", "ok",
            f_total=out.distortion_f.total, g_total=out.distortion_g.total)

    ident_x = np.arange(iso.nx)
    ident_y = np.arange(iso.ny)
    out.closeness_gf = closeness_level(_compose_maps(g, f), ident_x, iso.source, cfg.K)
    out.closeness_fg = closeness_level(_compose_maps(f, g), ident_y, iso.target, cfg.K)
    out.log("closeness_level", "ok", gf=out.closeness_gf.level, fg=out.closeness_fg.level)

    out.entourage_target = entourage_union_level(loc, iso.target)
    out.entourage_source = membership_level(loc.source_union_relation(), iso.source)
    out.log("entourage_union_level", "ok",
            target=out.entourage_target.level, source=out.entourage_source.level)

    certs = [out.distortion_f.total, out.distortion_g.total, out.closeness_gf.contained,
             out.closeness_fg.contained, out.entourage_target.contained, out.entourage_source.contained]
    if all(certs):
        out.verdict = "coarse_equivalence" if surjective else "coarse_embedding"
    else:
        out.verdict = "inconclusive"
    return out
