"""Coarse-graining over partial (ragged) bipartition tables.

A partial bipartition table places orthonormal vectors ``e_ik`` in some
of the cells of a ``rows x cols`` grid.  The operators

    S_kl = sum_{i in CR(k, l)} |e_ik><e_il|,

with ``CR(k, l)`` the rows holding both cells ``(i, k)`` and ``(i, l)``,
span an operator system: closed under adjoints and linear combinations,
with identity ``sum_k S_kk``, but not in general under products.
Tracing out the row index gives a state on the column space, and
observables correspond through ``O = sum_kl (O_B)_kl S_kl``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InputError, NotInSpan, NotOrthonormal
from .linalg import DEFAULT_TOLERANCES, ToleranceConfig, as_matrix, cluster_sorted
from .reduction import DensityMatrix, _rho

SPAN_GATE = 1e-6


@dataclass(frozen=True)
class PartialBipartitionTable:
    """``cells[(i, k)]`` is the ambient vector in row ``i`` and column ``k``."""

    rows: tuple
    cols: tuple
    cells: dict
    tol: float = 1e-9

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        object.__setattr__(self, "cols", tuple(self.cols))
        cells = {}
        for (i, k), vec in self.cells.items():
            if not (0 <= i < len(self.rows) and 0 <= k < len(self.cols)):
                raise InputError(f"cell {(i, k)} lies outside the table")
            v = np.asarray(vec, dtype=complex).ravel()
            v.setflags(write=False)
            cells[(int(i), int(k))] = v
        if not cells:
            raise InputError("table has no cells")
        dims = {v.size for v in cells.values()}
        if len(dims) != 1:
            raise DimensionMismatch("cell vectors have different dimensions")
        for i in range(len(self.rows)):
            if not any(c[0] == i for c in cells):
                raise InputError(f"row {self.rows[i]!r} has no cells")
        for k in range(len(self.cols)):
            if not any(c[1] == k for c in cells):
                raise InputError(f"column {self.cols[k]!r} has no cells")
        object.__setattr__(self, "cells", dict(sorted(cells.items())))
        v = self.basis_matrix()
        err = float(np.max(np.abs(v.conj() @ v.T - np.eye(v.shape[0]))))
        if err > self.tol:
            raise NotOrthonormal(f"cell vectors are not orthonormal (error {err:.2e})")

    @property
    def dim(self) -> int:
        return next(iter(self.cells.values())).size

    def basis_matrix(self) -> np.ndarray:
        return np.vstack(list(self.cells.values()))

    def common_rows(self, k: int, l: int) -> list[int]:
        return [i for i in range(len(self.rows)) if (i, k) in self.cells and (i, l) in self.cells]

    def isometry(self, k: int, l: int) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for i in self.common_rows(k, l):
            out += np.outer(self.cells[(i, k)], self.cells[(i, l)].conj())
        return out

    def transpose(self) -> "PartialBipartitionTable":
        return PartialBipartitionTable(self.cols, self.rows,
                                       {(k, i): v for (i, k), v in self.cells.items()}, self.tol)

    @property
    def is_rectangular(self) -> bool:
        return len(self.cells) == len(self.rows) * len(self.cols)

    @classmethod
    def from_grid(cls, rows, cols, grid) -> "PartialBipartitionTable":
        """Build from a nested list ``grid[i][k]`` with ``None`` for empty cells."""
        cells = {(i, k): v for i, row in enumerate(grid) for k, v in enumerate(row) if v is not None}
        return cls(rows, cols, cells)


@dataclass(frozen=True)
class OperatorSystemBasis:
    """``entries[(k, l)] = S_kl`` for pairs with ``CR(k, l)`` non-empty."""

    pbpt: PartialBipartitionTable
    entries: dict
    norms: dict

    @property
    def size(self) -> int:
        return len(self.pbpt.cols)

    def identity(self) -> np.ndarray:
        return sum(self.entries[(k, k)] for k in range(self.size))


def skl_from_partial_bpt(pbpt: PartialBipartitionTable) -> OperatorSystemBasis:
    entries, norms = {}, {}
    n = len(pbpt.cols)
    for k in range(n):
        for l in range(n):
            cr = pbpt.common_rows(k, l)
            if cr:
                entries[(k, l)] = pbpt.isometry(k, l)
                norms[(k, l)] = len(cr)
    return OperatorSystemBasis(pbpt, entries, norms)


def trace_out_partial(rho, pbpt: PartialBipartitionTable, keep: str = "B") -> DensityMatrix:
    """Reduced state on the columns (``keep='B'``) or on the rows (``keep='A'``).

    Entry ``(l, k)`` of the column state is ``tr[S_kl rho]``; the row
    state uses the transposed table.
    """
    rho = _rho(rho)
    if keep.upper() == "A":
        pbpt = pbpt.transpose()
    elif keep.upper() != "B":
        raise InputError("keep must be 'A' or 'B'")
    if rho.shape[0] != pbpt.dim:
        raise DimensionMismatch("state and table dimensions differ")
    n = len(pbpt.cols)
    out = np.zeros((n, n), dtype=complex)
    for (i, k), ek in pbpt.cells.items():
        for l in range(n):
            el = pbpt.cells.get((i, l))
            if el is not None:
                # tr[|e_ik><e_il| rho] = <e_il| rho |e_ik>
                out[l, k] += np.vdot(el, rho @ ek)
    return DensityMatrix((out + out.conj().T) / 2)


def push_forward(o_b, basis: OperatorSystemBasis) -> np.ndarray:
    """Ambient operator ``sum_kl (O_B)_kl S_kl`` reproducing the reduced expectations."""
    o_b = np.asarray(o_b, dtype=complex)
    if o_b.shape != (basis.size, basis.size):
        raise DimensionMismatch(f"reduced operator must be {basis.size} x {basis.size}")
    out = np.zeros((basis.pbpt.dim, basis.pbpt.dim), dtype=complex)
    for (k, l), s in basis.entries.items():
        out += o_b[k, l] * s
    return out


def pull_back(o, basis: OperatorSystemBasis) -> tuple[np.ndarray, float]:
    """HS projection onto ``span{S_kl}``: ``(O_B)_kl = tr(S_kl^H O) / |CR(k, l)|``.

    Returns ``(O_B, residual)`` with ``residual = ||O - push_forward(O_B)||_F``.
    """
    o = as_matrix(o)
    if o.shape[0] != basis.pbpt.dim:
        raise DimensionMismatch("operator and table dimensions differ")
    o_b = np.zeros((basis.size, basis.size), dtype=complex)
    for (k, l), s in basis.entries.items():
        o_b[k, l] = np.vdot(s, o) / basis.norms[(k, l)]
    return o_b, float(np.linalg.norm(o - push_forward(o_b, basis)))


@dataclass(frozen=True)
class OutcomeDistortion:
    eigenvalue: float
    ambient: float
    reduced: float

    @property
    def difference(self) -> float:
        return self.reduced - self.ambient


def _spectral_weights(o: np.ndarray, rho: np.ndarray):
    w, v = np.linalg.eigh((o + o.conj().T) / 2)
    probs = np.real(np.einsum("dj,de,ej->j", v.conj(), rho, v))
    return w, probs


def probability_distortion(o, basis: OperatorSystemBasis, rho,
                           tol: ToleranceConfig = DEFAULT_TOLERANCES) -> list[OutcomeDistortion]:
    """Outcome probabilities of ``O`` on ``rho`` against those of ``O_B`` on the reduced state.

    One entry per distinct eigenvalue of ``O`` or ``O_B``.  ``O`` must lie
    in the operator system (``NotInSpan`` otherwise).
    """
    o = as_matrix(o)
    o_b, res = pull_back(o, basis)
    if res > SPAN_GATE * max(float(np.linalg.norm(o)), 1e-300):
        raise NotInSpan(f"operator is not in the spanned operator system (residual {res:.3e})")
    rho = _rho(rho)
    rho_b = trace_out_partial(rho, basis.pbpt).matrix
    wa, pa = _spectral_weights(o, rho)
    wb, pb = _spectral_weights(o_b, rho_b)
    values = np.concatenate([wa, wb])
    probs = np.concatenate([pa, np.zeros_like(pb)]), np.concatenate([np.zeros_like(pa), pb])
    order = np.argsort(values, kind="stable")
    scale = max(float(np.max(np.abs(values))), 1.0)
    out = []
    for idx in cluster_sorted(values[order], tol.tol_eig_cluster * scale):
        sel = order[idx]
        out.append(OutcomeDistortion(float(np.mean(values[sel])),
                                     float(np.sum(probs[0][sel])), float(np.sum(probs[1][sel]))))
    out.reverse()
    return out
