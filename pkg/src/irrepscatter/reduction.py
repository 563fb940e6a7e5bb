"""Using a decomposition: reduced Hamiltonians, reduced states and symmetry splits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bipartition import (
    BipartitionTable,
    IsometryFamily,
    MEMBERSHIP_GATE,
    WedderburnDecomposition,
    decompose,
    isometries_from_bpt,
    require_membership,
    transpose,
    verify_membership,
    wedderburn_from_bpt,
)
from .errors import CapExceeded, DimensionMismatch, InputError, NotAGroup
from .linalg import as_matrix, check_hermitian

DENSITY_TOL = 1e-10
GROUP_ORDER_CAP = 10_000


# -- density matrices ----------------------------------------------------


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if np.max(np.abs(m - m.conj().T)) > 1e-9:
            raise InputError("density matrix is not Hermitian")
        m = (m + m.conj().T) / 2
        if abs(np.trace(m).real - 1) > DENSITY_TOL:
            raise InputError(f"density matrix has trace {np.trace(m).real!r}")
        if np.linalg.eigvalsh(m)[0] < -DENSITY_TOL:
            raise InputError("density matrix is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def pure(cls, psi) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))


def _rho(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else as_matrix(rho)


# -- Hamiltonian reduction -----------------------------------------------


@dataclass(frozen=True)
class ReducedBlocks:
    """``blocks[q]`` is the irrep-factor matrix ``H_q`` (``m_q x m_q``)."""

    blocks: tuple
    mult_dims: tuple
    residual: float
    row_deviation: float

    def spectrum(self) -> np.ndarray:
        """Eigenvalues of the reassembled operator, each block repeated ``n_q`` times."""
        parts = [np.tile(np.linalg.eigvalsh(b), n) for b, n in zip(self.blocks, self.mult_dims)]
        return np.sort(np.concatenate(parts)) if parts else np.zeros(0)

    def reassemble(self) -> np.ndarray:
        """``(+)_q I_n (x) H_q`` in the layout of the decomposition."""
        mats = [np.kron(np.eye(n), b) for b, n in zip(self.blocks, self.mult_dims)]
        size = sum(m.shape[0] for m in mats)
        out = np.zeros((size, size), dtype=complex)
        o = 0
        for m in mats:
            out[o:o + m.shape[0], o:o + m.shape[0]] = m
            o += m.shape[0]
        return out


def reduce_hamiltonian(h, wd: WedderburnDecomposition, gate: float = MEMBERSHIP_GATE) -> ReducedBlocks:
    """Blocks of ``h`` read off the first multiplicity row of ``V h V^H``.

    ``h`` has to be in the algebra (relative residual at most ``gate``),
    otherwise ``NotInAlgebra`` is raised.
    """
    h = check_hermitian(h)
    if h.shape[0] != wd.V.shape[1]:
        raise DimensionMismatch("operator and decomposition dimensions differ")
    rep = require_membership(wd.bpt, h, gate)
    blocks = []
    for b in wd.bpt.blocks:
        e0 = b.vectors[0]  # (m, d)
        blk = e0.conj() @ h @ e0.T
        blocks.append((blk + blk.conj().T) / 2)
    return ReducedBlocks(tuple(blocks), tuple(b.rows for b in wd.bpt.blocks), rep.residual, rep.row_deviation)


def reduce_commutant_side(h, wd: WedderburnDecomposition, gate: float = MEMBERSHIP_GATE) -> ReducedBlocks:
    """Blocks ``H_nu_q`` (``n_q x n_q``) of an operator in the commutant."""
    return reduce_hamiltonian(h, wedderburn_from_bpt(transpose(wd.bpt)), gate)


@dataclass(frozen=True)
class FactorizedHamiltonian:
    """``H = H_nu + H_mu`` with ``V H V^H = (+)_q (N_q (x) I + I (x) M_q)``."""

    wd: WedderburnDecomposition
    nu_blocks: tuple
    mu_blocks: tuple

    def evolution(self, t: float) -> np.ndarray:
        """``(+)_q exp(-it N_q) (x) exp(-it M_q)`` in the layout of ``wd``."""
        out = np.zeros((self.wd.support_dim, self.wd.support_dim), dtype=complex)
        for b, s, nb, mb in zip(self.wd.blocks, self.wd.block_slices(), self.nu_blocks, self.mu_blocks):
            out[s, s] = np.kron(unitary_evolution(nb, t), unitary_evolution(mb, t))
        return out


def factorize(h_nu, h_mu, wd: WedderburnDecomposition, gate: float = MEMBERSHIP_GATE) -> FactorizedHamiltonian:
    nu = reduce_commutant_side(h_nu, wd, gate)
    mu = reduce_hamiltonian(h_mu, wd, gate)
    return FactorizedHamiltonian(wd, nu.blocks, mu.blocks)


def unitary_evolution(h, t: float) -> np.ndarray:
    """``exp(-i t h)`` through the eigendecomposition of Hermitian ``h``."""
    w, v = np.linalg.eigh(np.asarray(h, dtype=complex))
    return (v * np.exp(-1j * t * w)) @ v.conj().T


# -- state reduction -----------------------------------------------------


@dataclass(frozen=True)
class StateReductionMap:
    """``rho -> (+)_q sum_kl tr[S^q_kl rho] |m_l><m_k|`` for a BPT."""

    bpt: BipartitionTable
    offsets: tuple

    @classmethod
    def from_bpt(cls, bpt: BipartitionTable) -> "StateReductionMap":
        offsets, o = [], 0
        for b in bpt.blocks:
            offsets.append(o)
            o += b.cols
        return cls(bpt, tuple(offsets))

    @property
    def reduced_dim(self) -> int:
        return sum(b.cols for b in self.bpt.blocks)

    @property
    def family(self) -> IsometryFamily:
        return isometries_from_bpt(self.bpt)

    def block_states(self, rho) -> list[np.ndarray]:
        """Reduced block ``q``: entry ``(l, k) = sum_i <e_il| rho |e_ik>``."""
        rho = _rho(rho)
        if rho.shape[0] != self.bpt.dim:
            raise DimensionMismatch("state and table dimensions differ")
        out = []
        for b in self.bpt.blocks:
            x = np.einsum("ild,de,ike->lk", b.vectors.conj(), rho, b.vectors)
            out.append(x)
        return out

    def apply(self, rho) -> np.ndarray:
        size = self.reduced_dim
        out = np.zeros((size, size), dtype=complex)
        for o, x in zip(self.offsets, self.block_states(rho)):
            out[o:o + x.shape[0], o:o + x.shape[0]] = x
        return out

    def pure_block_states(self, psi: np.ndarray) -> list[np.ndarray]:
        """Block states for state vectors ``psi`` with shape ``(d,)`` or ``(d, T)``."""
        psi = np.asarray(psi, dtype=complex)
        single = psi.ndim == 1
        if single:
            psi = psi[:, None]
        out = []
        for b in self.bpt.blocks:
            c = np.einsum("ikd,dt->tik", b.vectors.conj(), psi)
            r = np.einsum("til,tik->tlk", c, c.conj())
            out.append(r[0] if single else r)
        return out


def reduce_state(rho, rmap: StateReductionMap) -> DensityMatrix:
    out = rmap.apply(rho)
    return DensityMatrix((out + out.conj().T) / 2)


def partial_trace(rho, dims: tuple[int, int], keep: str = "B") -> np.ndarray:
    """Standard partial trace on ``C^dA (x) C^dB``; ``keep`` names the surviving factor."""
    rho = _rho(rho)
    da, db = dims
    if da * db != rho.shape[0]:
        raise DimensionMismatch(f"{da} x {db} does not match dimension {rho.shape[0]}")
    t = rho.reshape(da, db, da, db)
    if keep.upper() == "B":
        return np.einsum("ajak->jk", t)
    if keep.upper() == "A":
        return np.einsum("ajbj->ab", t)
    raise InputError("keep must be 'A' or 'B'")


def totally_mixed_reduction(rmap: StateReductionMap) -> np.ndarray:
    """Reduction of ``I/d``: block ``q`` is ``(n_q / d) I_{m_q}``."""
    return rmap.apply(np.eye(rmap.bpt.dim) / rmap.bpt.dim)


@dataclass(frozen=True)
class PuritySeries:
    times: np.ndarray
    purity: np.ndarray

    def __iter__(self):
        return iter(zip(self.times.tolist(), self.purity.tolist()))

    def __len__(self):
        return len(self.times)


def purity_timeseries(h, rho0, rmap: StateReductionMap, times) -> PuritySeries:
    """Purity of the reduced state along ``rho(t) = e^{-itH} rho0 e^{itH}``.

    ``H`` is diagonalized once; ``rho0`` is split into its eigenvectors of
    nonzero weight and each one is evolved for all times at once.
    """
    h = check_hermitian(h)
    rho0 = _rho(rho0)
    if rho0.shape != h.shape or h.shape[0] != rmap.bpt.dim:
        raise DimensionMismatch("Hamiltonian, state and map dimensions differ")
    times = np.asarray(times, dtype=float)
    w, v = np.linalg.eigh(h)
    p, psis = np.linalg.eigh((rho0 + rho0.conj().T) / 2)
    keep = p > DENSITY_TOL
    blocks = None
    for pj, psi in zip(p[keep], psis[:, keep].T):
        coeff = v.conj().T @ psi
        evolved = v @ (coeff[:, None] * np.exp(-1j * np.outer(w, times)))
        parts = rmap.pure_block_states(evolved)
        if blocks is None:
            blocks = [pj * r for r in parts]
        else:
            blocks = [acc + pj * r for acc, r in zip(blocks, parts)]
    purity = sum(np.sum(np.abs(r) ** 2, axis=(1, 2)) for r in blocks)
    return PuritySeries(times, np.asarray(purity, dtype=float))


# -- finite groups -------------------------------------------------------


def _key(u: np.ndarray) -> bytes:
    return (np.round(u, 8) + 0.0).tobytes()


class FiniteGroupRep:
    """A finite group of unitaries, stored as its full element list.

    ``FiniteGroupRep(unitaries)`` checks closure of the given list;
    ``FiniteGroupRep.generate(gens)`` builds the closure by breadth-first
    multiplication.
    """

    def __init__(self, unitaries, tol: float = 1e-9):
        mats = [as_matrix(u) for u in unitaries]
        if not mats:
            raise NotAGroup("empty group")
        d = mats[0].shape[0]
        for u in mats:
            if u.shape[0] != d:
                raise DimensionMismatch("group elements have different dimensions")
            if np.max(np.abs(u.conj().T @ u - np.eye(d))) > tol:
                raise NotAGroup("group element is not unitary")
        if len(mats) > GROUP_ORDER_CAP:
            raise CapExceeded(f"group order exceeds {GROUP_ORDER_CAP}")
        self.dim = d
        self.elements = mats
        self.generators = mats
        index = {_key(u) for u in mats}
        if len(index) != len(mats):
            raise NotAGroup("repeated group elements")
        if _key(np.eye(d, dtype=complex)) not in index:
            raise NotAGroup("identity is missing")
        for a in mats:
            if _key(a.conj().T) not in index:
                raise NotAGroup("set is not closed under inverses")
            for b in mats:
                if _key(a @ b) not in index:
                    raise NotAGroup("set is not closed under multiplication")

    @classmethod
    def generate(cls, generators, cap: int = GROUP_ORDER_CAP) -> "FiniteGroupRep":
        gens = [as_matrix(g) for g in generators]
        if not gens:
            raise NotAGroup("no generators")
        d = gens[0].shape[0]
        for g in gens:
            if np.max(np.abs(g.conj().T @ g - np.eye(d))) > 1e-9:
                raise NotAGroup("generator is not unitary")
        e = np.eye(d, dtype=complex)
        seen = {_key(e): e}
        frontier = [e]
        while frontier:
            nxt = []
            for a in frontier:
                for g in gens:
                    b = g @ a
                    k = _key(b)
                    if k not in seen:
                        seen[k] = b
                        nxt.append(b)
                        if len(seen) > cap:
                            raise CapExceeded(f"group order exceeds {cap}")
            frontier = nxt
        group = cls(list(seen.values()))
        group.generators = gens
        return group

    @property
    def order(self) -> int:
        return len(self.elements)

    def average(self, h) -> np.ndarray:
        h = as_matrix(h)
        return sum(u @ h @ u.conj().T for u in self.elements) / self.order

    def algebra_generators(self) -> list[np.ndarray]:
        """Hermitian operators generating the group algebra."""
        out = []
        for u in self.generators:
            out.append((u + u.conj().T) / 2)
            anti = 1j * (u - u.conj().T) / 2
            if np.max(np.abs(anti)) > 1e-12:
                out.append(anti)
        return out


@dataclass(frozen=True)
class SymmetrySplit:
    H_nu: np.ndarray
    H_mu: np.ndarray
    commutator_residual: float
    membership_residual: float

    def __iter__(self):
        return iter((self.H_nu, self.H_mu))


def split_symmetry(h, group: FiniteGroupRep, bpt: BipartitionTable | None = None) -> SymmetrySplit:
    """``H_nu`` = group average of ``H``, ``H_mu = H - H_nu``.

    ``membership_residual`` is the relative distance of ``H_mu`` from the
    group algebra (computed from ``bpt`` if given, otherwise from a fresh
    decomposition of the group algebra).  A small value means the
    reduced dynamics factorizes over the blocks.
    """
    h = check_hermitian(h)
    if h.shape[0] != group.dim:
        raise DimensionMismatch("operator and group dimensions differ")
    h_nu = group.average(h)
    h_nu = (h_nu + h_nu.conj().T) / 2
    h_mu = h - h_nu
    comm = max(float(np.max(np.abs(h_nu @ u - u @ h_nu))) for u in group.elements)
    if bpt is None:
        bpt = decompose(group.algebra_generators(), include_identity=True).bpt
    res = verify_membership(bpt, h_mu).residual if np.linalg.norm(h_mu) > 0 else 0.0
    return SymmetrySplit(h_nu, h_mu, comm, res)
