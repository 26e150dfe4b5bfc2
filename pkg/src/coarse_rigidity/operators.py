"""Finitely supported operators on ``l2`` of a finite ground set.

Matrix orientation: ``op.matrix[y, x] = <a delta_x, delta_y>``, so column ``x``
is the image of ``delta_x``.  The support of ``a`` is the relation
``{(x, y) : entry(y, x) != 0}``; note the swap relative to matrix indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .groups import Group
from .relations import GroundSet, Relation, _as_ground

__all__ = [
    "SparseOperator",
    "support",
    "partial_translation",
    "spectral_norm",
    "rank_one_norm_identity_check",
    "conditional_expectation",
    "translation_unitary",
    "CrossedDecomposition",
    "crossed_decompose",
    "random_operator",
    "DENSE_NORM_LIMIT",
]

DENSE_NORM_LIMIT = 512


class SparseOperator:
    """A complex matrix ``codomain x domain`` with finitely many nonzero entries."""

    __slots__ = ("domain", "codomain", "matrix")

    def __init__(self, matrix, domain=None, codomain=None):
        m = sp.csr_array(matrix, dtype=np.complex128)
        rows, cols = m.shape
        self.domain = _as_ground(domain if domain is not None else cols)
        self.codomain = _as_ground(codomain if codomain is not None else rows)
        if (rows, cols) != (self.codomain.size, self.domain.size):
            raise ValueError(
                f"matrix shape {m.shape} does not match "
                f"(codomain {self.codomain.size}, domain {self.domain.size})"
            )
        m.eliminate_zeros()
        m.sort_indices()
        self.matrix = m

    @classmethod
    def from_entries(cls, entries: Mapping, domain, codomain=None) -> "SparseOperator":
        """Build from ``{(y, x): value}``, i.e. ``value = <a delta_x, delta_y>``."""
        domain = _as_ground(domain)
        codomain = _as_ground(codomain) if codomain is not None else domain
        if entries:
            keys = list(entries)
            ys = np.array([k[0] for k in keys], dtype=np.int64)
            xs = np.array([k[1] for k in keys], dtype=np.int64)
            vals = np.array([entries[k] for k in keys], dtype=np.complex128)
            if ys.min() < 0 or xs.min() < 0 or ys.max() >= codomain.size or xs.max() >= domain.size:
                raise ValueError("entry index out of range")
        else:
            ys = xs = np.zeros(0, dtype=np.int64)
            vals = np.zeros(0, dtype=np.complex128)
        m = sp.csr_array((vals, (ys, xs)), shape=(codomain.size, domain.size))
        return cls(m, domain, codomain)

    @classmethod
    def identity(cls, ground) -> "SparseOperator":
        g = _as_ground(ground)
        return cls(sp.identity(g.size, dtype=np.complex128, format="csr"), g, g)

    @classmethod
    def matrix_unit(cls, ground, x: int, y: int) -> "SparseOperator":
        """``e_{xy}``: the rank-one partial isometry sending ``delta_x`` to ``delta_y``."""
        return cls.from_entries({(y, x): 1.0}, ground)

    @classmethod
    def diagonal(cls, values, ground=None) -> "SparseOperator":
        v = np.asarray(values, dtype=np.complex128)
        g = ground if ground is not None else len(v)
        return cls(sp.diags_array(v, format="csr"), g, g)

    @classmethod
    def indicator(cls, ground, subset) -> "SparseOperator":
        """``chi_A``, the diagonal projection onto ``span{delta_x : x in A}``."""
        g = _as_ground(ground)
        v = np.zeros(g.size)
        v[list(subset)] = 1.0
        return cls.diagonal(v, g)

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def entry(self, y: int, x: int) -> complex:
        return complex(self.matrix[y, x])

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def adjoint(self) -> "SparseOperator":
        return SparseOperator(self.matrix.conj().T, self.codomain, self.domain)

    H = property(adjoint)

    def __matmul__(self, other: "SparseOperator") -> "SparseOperator":
        if isinstance(other, SparseOperator):
            if self.domain.size != other.codomain.size:
                raise ValueError("operator dimensions do not compose")
            return SparseOperator(self.matrix @ other.matrix, other.domain, self.codomain)
        return self.matrix @ np.asarray(other)

    def __add__(self, other: "SparseOperator") -> "SparseOperator":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return SparseOperator(self.matrix + other.matrix, self.domain, self.codomain)

    def __sub__(self, other: "SparseOperator") -> "SparseOperator":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return SparseOperator(self.matrix - other.matrix, self.domain, self.codomain)

    def __mul__(self, scalar) -> "SparseOperator":
        return SparseOperator(self.matrix * scalar, self.domain, self.codomain)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, SparseOperator) or self.shape != other.shape:
            return NotImplemented
        return (self.matrix != other.matrix).nnz == 0

    __hash__ = None

    def __repr__(self):
        return f"SparseOperator(shape={self.shape}, nnz={self.nnz})"

    def triplets(self) -> list[tuple[int, int, complex]]:
        """Nonzero entries as ``(y, x, value)``, sorted row-major."""
        m = self.matrix
        out = []
        for y in range(m.shape[0]):
            for k in range(m.indptr[y], m.indptr[y + 1]):
                out.append((y, int(m.indices[k]), complex(m.data[k])))
        return out


def support(a: SparseOperator, eps: float = 0.0) -> Relation:
    """``{(x, y) : |<a delta_x, delta_y>| > eps}``; needs a square operator."""
    if a.domain.size != a.codomain.size:
        raise ValueError("support as a relation needs a square operator")
    if eps < 0:
        raise ValueError("threshold must be nonnegative")
    m = a.matrix.tocoo()
    keep = np.abs(m.data) > eps
    return Relation(a.domain, frozenset(zip(m.col[keep].tolist(), m.row[keep].tolist())))


def partial_translation(e: Relation) -> SparseOperator:
    """``v_E``: the 0/1 operator sending ``delta_x`` to ``sum_{(x, x') in E} delta_x'``."""
    a = e.array
    n = e.size
    m = sp.csr_array(
        (np.ones(len(a), dtype=np.complex128), (a[:, 1], a[:, 0])), shape=(n, n)
    )
    return SparseOperator(m, e.ground, e.ground)


def _as_matrix(a):
    if isinstance(a, SparseOperator):
        return a.matrix
    return a


def spectral_norm(a, *, rtol: float = 1e-10, maxiter: int = 10_000, seed: int = 0) -> float:
    """Largest singular value.

    Dense SVD when both dimensions are at most ``DENSE_NORM_LIMIT``.  Above
    that, Lanczos bidiagonalization (``scipy.sparse.linalg.svds``) to ``rtol``;
    plain power iteration on ``a* a`` stalls when the top singular values are
    nearly degenerate (banded operators), so it is only the fallback when
    ARPACK does not converge.
    """
    m = _as_matrix(a)
    rows, cols = m.shape
    if rows == 0 or cols == 0:
        return 0.0
    if max(rows, cols) <= DENSE_NORM_LIMIT:
        dense = m.toarray() if sp.issparse(m) else np.asarray(m)
        if not np.any(dense):
            return 0.0
        return float(np.linalg.norm(dense, 2))
    if m.nnz == 0:
        return 0.0
    if min(rows, cols) > 1:
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(min(rows, cols))
        try:
            s = spla.svds(sp.csr_array(m, dtype=np.complex128), k=1, tol=rtol,
                          maxiter=maxiter, v0=v0, return_singular_vectors=False)
            return float(s[0])
        except spla.ArpackNoConvergence:
            pass
    return _power_norm(m, rtol=rtol, maxiter=maxiter, seed=seed)


def _power_norm(m, *, rtol, maxiter, seed) -> float:
    mh = m.conj().T
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(m.shape[1]) + 1j * rng.standard_normal(m.shape[1])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(maxiter):
        w = mh @ (m @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        new = float(np.real(np.vdot(v, w)))
        v = w / nw
        if abs(new - lam) <= rtol * new:
            lam = new
            break
        lam = new
    return float(np.sqrt(lam))


def _rank_one_check(m: np.ndarray, name: str, tol: float = 1e-9):
    s = np.linalg.svd(m, compute_uv=False)
    if len(s) > 1 and s[0] > 0 and s[1] > tol * s[0]:
        raise ValueError(f"{name} has rank > 1 (second singular value {s[1]:.3g})")


def rank_one_norm_identity_check(b, v, c, *, rtol: float = 1e-9) -> bool:
    """Check ``||v|| ||b v c|| == ||b v|| ||v c||`` for rank-one ``b, v, c``.

    Raises ``ValueError`` if an argument has rank above one.
    """
    mats = []
    for name, op in (("b", b), ("v", v), ("c", c)):
        m = _as_matrix(op)
        m = m.toarray() if sp.issparse(m) else np.asarray(m, dtype=np.complex128)
        _rank_one_check(m, name)
        mats.append(m)
    mb, mv, mc = mats
    nrm = lambda z: float(np.linalg.norm(z, 2)) if z.size else 0.0
    lhs = nrm(mv) * nrm(mb @ mv @ mc)
    rhs = nrm(mb @ mv) * nrm(mv @ mc)
    scale = max(abs(lhs), abs(rhs))
    if scale == 0.0:
        return True
    return abs(lhs - rhs) <= rtol * scale


def conditional_expectation(a: SparseOperator) -> SparseOperator:
    """Restriction to the diagonal (the expectation onto ``l_infty``)."""
    if a.domain.size != a.codomain.size:
        raise ValueError("conditional expectation needs a square operator")
    return SparseOperator.diagonal(a.matrix.diagonal(), a.domain)


def translation_unitary(group: Group, g: int) -> SparseOperator:
    """``u_g`` with ``u_g delta_h = delta_{g h}``."""
    n = group.order
    cols = np.arange(n)
    rows = group.table[g, cols]
    m = sp.csr_array((np.ones(n, dtype=np.complex128), (rows, cols)), shape=(n, n))
    return SparseOperator(m, group.ground, group.ground)


@dataclass(frozen=True)
class CrossedDecomposition:
    """Diagonal coefficients ``a_g`` with ``a = sum_g a_g u_g``."""

    group: Group
    coefficients: dict

    def reconstruct(self) -> SparseOperator:
        g0 = self.group.ground
        out = SparseOperator(sp.csr_array((g0.size, g0.size), dtype=np.complex128), g0, g0)
        for g, ag in self.coefficients.items():
            out = out + ag @ translation_unitary(self.group, g)
        return out


def crossed_decompose(a: SparseOperator, group: Group, s) -> CrossedDecomposition:
    """Write ``a`` as ``sum_{g in S} a_g u_g`` with ``a_g = E(a u_g^*)`` diagonal.

    The entry ``(y, x)`` of ``a`` is carried by ``u_g`` for ``g = y x^{-1}``; every
    nonzero entry must have that group element in ``S`` (for symmetric ``S`` this
    is ``supp(a)`` inside ``E_S``).  Otherwise ``ValueError`` names the pair.
    """
    if a.shape != (group.order, group.order):
        raise ValueError("operator does not act on the group")
    s = sorted(set(int(g) for g in s))
    allowed = set(s)
    m = a.matrix.tocoo()
    for y, x, val in zip(m.row.tolist(), m.col.tolist(), m.data):
        g = int(group.table[y, group.inverse[x]])
        if g not in allowed:
            raise ValueError(
                f"support pair {(x, y)} escapes E_S: carried by group element {g} not in S"
            )
    coeffs = {}
    for g in s:
        ug = translation_unitary(group, g)
        coeffs[g] = conditional_expectation(a @ ug.adjoint())
    return CrossedDecomposition(group, coeffs)


def random_operator(rel: Relation, rng: np.random.Generator) -> SparseOperator:
    """Independent standard complex Gaussian entries on ``rel`` (as a support)."""
    arr = rel.array
    k = len(arr)
    vals = (rng.standard_normal(k) + 1j * rng.standard_normal(k)) / np.sqrt(2.0)
    n = rel.size
    m = sp.csr_array((vals, (arr[:, 1], arr[:, 0])), shape=(n, n))
    return SparseOperator(m, rel.ground, rel.ground)
