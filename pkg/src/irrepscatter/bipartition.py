"""Bipartition tables and what follows from them.

A bipartition table (BPT) arranges an orthonormal basis of the Hilbert
space into blocks ``q``, each a ``rows x cols`` grid of vectors
``e[q][i, k]``.  The algebra acts within rows (``k`` index, the irrep
factor) and identically on every row (``i`` index, the multiplicity
factor).  Swapping the roles of rows and columns gives the commutant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NotFullySupported, NotInAlgebra
from .linalg import (
    DEFAULT_TOLERANCES,
    PartialIsometry,
    Projection,
    ToleranceConfig,
    as_matrix,
    orthonormalize,
    phase_fix_columns,
)
from .scattering import (
    ReflectionNetwork,
    maximal_orthogonal_set,
    path_isometry,
    run_scattering,
    shortest_path,
)

MEMBERSHIP_GATE = 1e-6


@dataclass(frozen=True)
class Block:
    """One block of a BPT; ``vectors[i, k]`` is the ambient vector of cell ``(i, k)``."""

    vectors: np.ndarray
    vertex_ids: tuple = ()

    @property
    def rows(self) -> int:
        return self.vectors.shape[0]

    @property
    def cols(self) -> int:
        return self.vectors.shape[1]

    @property
    def dim(self) -> int:
        return self.vectors.shape[2]

    @property
    def size(self) -> int:
        return self.rows * self.cols

    def transpose(self) -> "Block":
        return Block(np.ascontiguousarray(self.vectors.transpose(1, 0, 2)), self.vertex_ids)

    def isometry(self, k: int, l: int) -> np.ndarray:
        """``S_kl = sum_i |e_ik><e_il|``."""
        return self.vectors[:, k, :].T @ self.vectors[:, l, :].conj()


@dataclass(frozen=True)
class BipartitionTable:
    blocks: tuple
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        for b in self.blocks:
            if b.dim != self.dim:
                raise DimensionMismatch("block vectors do not live in the table dimension")

    @property
    def shapes(self) -> list[tuple[int, int]]:
        return [(b.rows, b.cols) for b in self.blocks]

    @property
    def support_dim(self) -> int:
        return sum(b.size for b in self.blocks)

    @property
    def complement_dim(self) -> int:
        return self.dim - self.support_dim

    @property
    def fully_supported(self) -> bool:
        return self.complement_dim == 0

    def basis_matrix(self) -> np.ndarray:
        """``support x dim`` matrix whose rows are the cell vectors in ``(q, i, k)`` order."""
        rows = [b.vectors.reshape(b.size, self.dim) for b in self.blocks]
        if not rows:
            return np.zeros((0, self.dim), dtype=complex)
        return np.vstack(rows)

    def orthonormality_error(self) -> float:
        v = self.basis_matrix()
        return float(np.max(np.abs(v.conj() @ v.T - np.eye(v.shape[0])))) if v.size else 0.0

    def support_projection(self) -> np.ndarray:
        v = self.basis_matrix()
        return v.T @ v.conj()

    def __eq__(self, other):
        if not isinstance(other, BipartitionTable) or other.dim != self.dim:
            return NotImplemented
        if self.shapes != other.shapes:
            return False
        return all(np.array_equal(a.vectors, b.vectors) for a, b in zip(self.blocks, other.blocks))

    __hash__ = None


@dataclass(frozen=True)
class IsometryFamily:
    """Column-pair isometries ``S^q_kl`` of a BPT keyed by ``(q, k, l)``."""

    entries: dict

    def __getitem__(self, key) -> PartialIsometry:
        return self.entries[key]

    def __len__(self):
        return len(self.entries)

    def matrices(self) -> list[np.ndarray]:
        return [s.matrix for s in self.entries.values()]


@dataclass(frozen=True)
class WedderburnBlock:
    mult_dim: int
    irrep_dim: int
    offset: int


@dataclass(frozen=True)
class WedderburnDecomposition:
    """Block dimensions and the isometry ``V`` into the ``(+)_q C^n (x) C^m`` layout.

    Row ``offset_q + i * m_q + k`` of ``V`` is the conjugated cell vector
    ``e^q_ik``, so that ``V A V^H`` has diagonal blocks ``kron(I_n, A_q)``.
    """

    blocks: tuple
    V: np.ndarray
    bpt: BipartitionTable

    @property
    def dims(self) -> list[tuple[int, int]]:
        return [(b.mult_dim, b.irrep_dim) for b in self.blocks]

    @property
    def support_dim(self) -> int:
        return self.V.shape[0]

    @property
    def complement_dim(self) -> int:
        return self.V.shape[1] - self.V.shape[0]

    def to_layout(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=complex)
        return self.V @ a @ self.V.conj().T

    def block_slices(self):
        for b in self.blocks:
            yield slice(b.offset, b.offset + b.mult_dim * b.irrep_dim)

    def off_block_mass(self, a) -> float:
        """Frobenius norm of ``V A V^H`` outside the diagonal blocks."""
        t = self.to_layout(a)
        mask = np.ones(t.shape, dtype=bool)
        for s in self.block_slices():
            mask[s, s] = False
        return float(np.linalg.norm(t[mask]))

    def irrep_blocks(self, a) -> list[np.ndarray]:
        """``(n, m, m)`` stacks of the diagonal sub-blocks ``A_q`` found in every multiplicity slot."""
        t = self.to_layout(a)
        out = []
        for b, s in zip(self.blocks, self.block_slices()):
            n, m = b.mult_dim, b.irrep_dim
            sub = t[s, s]
            out.append(np.stack([sub[i * m:(i + 1) * m, i * m:(i + 1) * m] for i in range(n)]))
        return out


@dataclass
class Decomposition:
    network: ReflectionNetwork
    bpt: BipartitionTable
    wedderburn: WedderburnDecomposition

    @property
    def diagnostics(self) -> dict:
        s = self.network.stats
        return {"scatter_count": s.scatter_count, "minimality_repairs": s.minimality_repairs,
                "completeness_additions": s.completeness_additions}


def _first_column(proj: Projection) -> np.ndarray:
    """Deterministic orthonormal basis of the range of ``proj`` (eigenvalue-1 eigenvectors)."""
    _, v = np.linalg.eigh(proj.matrix)
    q = v[:, -proj.rank:]
    return phase_fix_columns(orthonormalize(q))


def bpt_from_network(net: ReflectionNetwork) -> BipartitionTable:
    """One block per connected component of a proper, minimal, complete network.

    Columns are the maximal orthogonal set of the component; the first
    column is an eigenbasis of its first projection and column ``k`` is
    the image of the first column under ``S_k1``, the path-isometry along
    a shortest path.
    """
    blocks = []
    comps = net.components()
    for ci, chosen in maximal_orthogonal_set(net):
        v1 = chosen[0]
        e1 = _first_column(net.projection(v1))
        rank = e1.shape[1]
        vec = np.zeros((rank, len(chosen), net.dim), dtype=complex)
        vec[:, 0, :] = e1.T
        for k, vk in enumerate(chosen[1:], start=1):
            s = path_isometry(net, shortest_path(net, vk, v1)).isometry.matrix
            vec[:, k, :] = (s @ e1).T
        blocks.append(Block(vec, tuple(comps[ci])))
    blocks.sort(key=lambda b: (b.cols, b.rows, min(b.vertex_ids)))
    return BipartitionTable(tuple(blocks), net.dim)


def isometries_from_bpt(bpt: BipartitionTable) -> IsometryFamily:
    entries = {}
    for q, b in enumerate(bpt.blocks):
        cols = [Projection(b.vectors[:, k, :].T) for k in range(b.cols)]
        for k in range(b.cols):
            for l in range(b.cols):
                entries[(q, k, l)] = PartialIsometry(matrix=b.isometry(k, l), initial=cols[l], final=cols[k])
    return IsometryFamily(entries)


def transpose(bpt: BipartitionTable) -> BipartitionTable:
    """BPT of the commutant: rows and columns swapped in every block."""
    if not bpt.fully_supported:
        raise NotFullySupported(
            f"table covers {bpt.support_dim} of {bpt.dim} dimensions; the commutant is not a BPT algebra")
    return BipartitionTable(tuple(b.transpose() for b in bpt.blocks), bpt.dim)


def wedderburn_from_bpt(bpt: BipartitionTable) -> WedderburnDecomposition:
    blocks = []
    offset = 0
    for b in bpt.blocks:
        blocks.append(WedderburnBlock(mult_dim=b.rows, irrep_dim=b.cols, offset=offset))
        offset += b.size
    v = bpt.basis_matrix().conj()
    return WedderburnDecomposition(tuple(blocks), v, bpt)


def _block_coords(b: Block, m: np.ndarray) -> np.ndarray:
    """``X[i, k, l] = <e_ik| M |e_il>``."""
    return np.einsum("ikd,de,ile->ikl", b.vectors.conj(), m, b.vectors)


def project_onto_algebra(bpt: BipartitionTable, m) -> np.ndarray:
    """HS-orthogonal projection of ``m`` onto ``span{S^q_kl}``."""
    m = as_matrix(m)
    out = np.zeros_like(m)
    for b in bpt.blocks:
        a = _block_coords(b, m).mean(axis=0)
        e = b.vectors  # (n, m, d)
        out += np.einsum("ikd,kl,ile->de", e, a, e.conj())
    return out


@dataclass(frozen=True)
class MembershipReport:
    residual: float
    row_deviation: float

    def __float__(self):
        return self.residual


def verify_membership(bpt: BipartitionTable, m) -> MembershipReport:
    """Distance of ``m`` from the algebra spanned by the table's isometries.

    ``residual`` is ``||M - P(M)||_F / ||M||_F`` (0 for ``M = 0``);
    ``row_deviation`` is the largest difference between the matrix
    elements ``<e_ik|M|e_il>`` of different multiplicity rows.
    """
    m = as_matrix(m)
    if m.shape[0] != bpt.dim:
        raise DimensionMismatch("operator and table dimensions differ")
    norm = float(np.linalg.norm(m))
    if norm == 0:
        return MembershipReport(0.0, 0.0)
    res = float(np.linalg.norm(m - project_onto_algebra(bpt, m))) / norm
    dev = 0.0
    for b in bpt.blocks:
        x = _block_coords(b, m)
        dev = max(dev, float(np.max(np.abs(x - x[0]))))
    return MembershipReport(res, dev)


def require_membership(bpt: BipartitionTable, m, gate: float = MEMBERSHIP_GATE) -> MembershipReport:
    rep = verify_membership(bpt, m)
    if rep.residual > gate:
        raise NotInAlgebra(f"operator is not in the algebra: relative residual {rep.residual:.3e}")
    return rep


def decompose(generators, include_identity: bool = False,
              tol: ToleranceConfig = DEFAULT_TOLERANCES) -> Decomposition:
    """Run the full scattering pipeline and build the BPT and Wedderburn data."""
    net = run_scattering(generators, include_identity, tol)
    bpt = bpt_from_network(net)
    return Decomposition(net, bpt, wedderburn_from_bpt(bpt))


def product_bpt(d_a: int, d_b: int) -> BipartitionTable:
    """Single ``d_a x d_b`` block with ``e_ik = |i> (x) |k>``: the algebra ``I (x) L(C^d_b)``."""
    eye = np.eye(d_a * d_b, dtype=complex)
    return BipartitionTable((Block(eye.reshape(d_a, d_b, d_a * d_b)),), d_a * d_b)
