"""Dense complex linear algebra used throughout the package.

Projections are stored through an orthonormal basis of their range
(a ``d x r`` matrix ``Q`` with ``P = Q Q^H``).  Working with ``Q`` keeps
products of projections cheap (``r x r`` overlap matrices instead of
``d x d`` products) and keeps idempotence exact up to the orthonormality
of ``Q``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import (
    DimensionMismatch,
    EigensolverFailure,
    InputError,
    NonHermitianInput,
    NotIsometry,
    NotProjection,
    ZeroOperator,
)

__all__ = [
    "ToleranceConfig",
    "DEFAULT_TOLERANCES",
    "Projection",
    "PartialIsometry",
    "as_matrix",
    "check_hermitian",
    "cluster_sorted",
    "spectral_projections",
    "normalize_to_isometry",
    "hs_inner",
    "phase_fix",
    "phase_fix_columns",
    "orthonormalize",
    "is_zero",
]


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical thresholds.

    ``tol_eig_cluster`` is relative to the spectral norm of the matrix being
    diagonalized and ``tol_zero`` is relative to the dimension; the other two
    are absolute max-norm thresholds.
    """

    tol_hermitian: float = 1e-9
    tol_idempotent: float = 1e-8
    tol_eig_cluster: float = 1e-8
    tol_zero: float = 1e-10

    def __post_init__(self):
        for name in ("tol_hermitian", "tol_idempotent", "tol_eig_cluster", "tol_zero"):
            if not getattr(self, name) > 0:
                raise InputError(f"{name} must be strictly positive")
        if self.tol_eig_cluster < self.tol_zero:
            raise InputError("tol_eig_cluster must be >= tol_zero")

    def replace(self, **changes) -> "ToleranceConfig":
        values = dict(
            tol_hermitian=self.tol_hermitian,
            tol_idempotent=self.tol_idempotent,
            tol_eig_cluster=self.tol_eig_cluster,
            tol_zero=self.tol_zero,
        )
        values.update({k: v for k, v in changes.items() if v is not None})
        return ToleranceConfig(**values)


DEFAULT_TOLERANCES = ToleranceConfig()


def as_matrix(a) -> np.ndarray:
    """Return ``a`` as a finite, square, complex ndarray."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InputError("matrix has non-finite entries")
    return m


def check_hermitian(m, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> np.ndarray:
    """Return the Hermitian part of ``m`` after checking ``m`` is Hermitian."""
    m = as_matrix(m)
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(m - m.conj().T)) > tol.tol_hermitian * scale:
        raise NonHermitianInput("operator is not Hermitian within tolerance")
    return (m + m.conj().T) / 2


def is_zero(a, tol: ToleranceConfig = DEFAULT_TOLERANCES, dim: int | None = None) -> bool:
    a = np.asarray(a)
    if a.size == 0:
        return True
    if dim is None:
        dim = max(a.shape)
    return float(np.max(np.abs(a))) <= tol.tol_zero * dim


def phase_fix(v: np.ndarray) -> np.ndarray:
    """Rotate the global phase so that the largest-magnitude entry is real positive."""
    flat = v.ravel()
    if flat.size == 0:
        return v
    idx = int(np.argmax(np.abs(flat)))
    a = flat[idx]
    if abs(a) == 0:
        return v
    return v * (abs(a) / a)


def phase_fix_columns(q: np.ndarray) -> np.ndarray:
    return np.column_stack([phase_fix(q[:, j]) for j in range(q.shape[1])]) if q.shape[1] else q


def orthonormalize(vectors: np.ndarray, rank: int | None = None) -> np.ndarray:
    """Modified Gram-Schmidt on the columns of ``vectors``.

    Columns whose residual norm falls below ``1e-10`` (relative to the
    largest column) are dropped.  With a given ``rank`` the result is
    instead the leading ``rank`` left singular vectors, which is the
    robust choice when the input is known to span exactly that many
    dimensions.
    """
    vectors = np.asarray(vectors, dtype=complex)
    if vectors.shape[1] == 0:
        return vectors
    if rank is not None:
        u, _, _ = np.linalg.svd(vectors, full_matrices=False)
        return u[:, :rank]
    scale = max(float(np.max(np.linalg.norm(vectors, axis=0))), 1e-300)
    out = []
    for j in range(vectors.shape[1]):
        v = vectors[:, j].copy()
        for _ in range(2):  # second pass restores orthogonality lost to rounding
            for u in out:
                v -= u * np.vdot(u, v)
        n = np.linalg.norm(v)
        if n > 1e-10 * scale:
            out.append(v / n)
    if not out:
        return np.zeros((vectors.shape[0], 0), dtype=complex)
    return np.column_stack(out)


def cluster_sorted(values: np.ndarray, gap: float) -> list[np.ndarray]:
    """Single-linkage clusters of ascending ``values``.

    Neighbouring values closer than ``gap`` end up in the same cluster.
    Returns index arrays into ``values``.
    """
    values = np.asarray(values)
    if values.size == 0:
        return []
    breaks = np.nonzero(np.diff(values) >= gap)[0] + 1
    return np.split(np.arange(values.size), breaks)


class Projection:
    """An orthogonal projection, stored through an orthonormal basis of its range."""

    __slots__ = ("basis", "_matrix")

    def __init__(self, basis: np.ndarray):
        basis = np.asarray(basis, dtype=complex)
        if basis.ndim != 2:
            raise DimensionMismatch("projection basis must be a d x r matrix")
        self.basis = basis
        self.basis.setflags(write=False)
        self._matrix = None

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            m = self.basis @ self.basis.conj().T
            m.setflags(write=False)
            self._matrix = m
        return self._matrix

    @classmethod
    def from_matrix(cls, p, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> "Projection":
        """Certify ``p`` as a projection and extract a range basis."""
        p = as_matrix(p)
        if np.max(np.abs(p - p.conj().T)) > tol.tol_idempotent:
            raise NotProjection("matrix is not self-adjoint")
        if np.max(np.abs(p @ p - p)) > tol.tol_idempotent:
            raise NotProjection("matrix is not idempotent")
        tr = float(np.real(np.trace(p)))
        rank = int(round(tr))
        if abs(tr - rank) > 1e-6:
            raise NotProjection(f"trace {tr} is not an integer")
        if rank == 0:
            raise ZeroOperator("projection has rank zero")
        w, v = np.linalg.eigh((p + p.conj().T) / 2)
        q = orthonormalize(v[:, -rank:], rank=rank)
        return cls(phase_fix_columns(q))

    @classmethod
    def from_vectors(cls, vectors) -> "Projection":
        """Projection onto the span of some vectors.

        ``vectors`` is either a sequence of 1-d vectors or a ``d x k`` array
        whose columns span the range.
        """
        if isinstance(vectors, (list, tuple)):
            arr = np.column_stack([np.asarray(v, dtype=complex) for v in vectors])
        else:
            arr = np.asarray(vectors, dtype=complex)
            if arr.ndim == 1:
                arr = arr[:, None]
        return cls(orthonormalize(arr))

    def __repr__(self):
        return f"Projection(dim={self.dim}, rank={self.rank})"


@dataclass(frozen=True)
class PartialIsometry:
    matrix: np.ndarray
    initial: Projection
    final: Projection


def spectral_projections(m, tol: ToleranceConfig = DEFAULT_TOLERANCES):
    """Spectral projections of a Hermitian matrix, eigenvalues descending.

    Eigenvalues are clustered by single linkage with threshold
    ``tol_eig_cluster * ||m||_2``; each cluster's eigenvectors are
    re-orthonormalized and phase-fixed before forming the projection.

    Returns a list of ``(eigenvalue, Projection)``.
    """
    m = check_hermitian(m, tol)
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise EigensolverFailure(str(exc)) from exc
    norm = max(float(np.max(np.abs(w))), np.finfo(float).tiny)
    out = []
    for idx in cluster_sorted(w, tol.tol_eig_cluster * norm):
        q = orthonormalize(v[:, idx], rank=len(idx)) if len(idx) > 1 else v[:, idx]
        out.append((float(np.mean(w[idx])), Projection(phase_fix_columns(q))))
    out.reverse()
    return out


def normalize_to_isometry(s_tilde, pi1: Projection, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> PartialIsometry:
    """Rescale ``s_tilde`` (proportional to a minimal isometry) so that ``S S^H = pi1``.

    The scale is ``c = sqrt(tr[pi1] / tr[s_tilde s_tilde^H])``.
    """
    s_tilde = np.asarray(s_tilde, dtype=complex)
    if s_tilde.shape != (pi1.dim, pi1.dim):
        raise DimensionMismatch("isometry and projection dimensions differ")
    if is_zero(s_tilde, tol):
        raise ZeroOperator("cannot normalize a zero operator")
    gram = s_tilde @ s_tilde.conj().T
    c = np.sqrt(pi1.rank / np.real(np.trace(gram)))
    s = c * s_tilde
    final = s @ s.conj().T
    if np.max(np.abs(final - pi1.matrix)) > tol.tol_idempotent * max(1, pi1.rank):
        raise NotIsometry("S S^H is not the expected projection; inputs are not minimal")
    try:
        initial = Projection.from_matrix(s.conj().T @ s, tol)
    except (NotProjection, ZeroOperator) as exc:
        raise NotIsometry(str(exc)) from exc
    return PartialIsometry(matrix=s, initial=initial, final=pi1)


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product ``tr(a^H b)``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    return complex(np.vdot(a, b))


def unit_circle_clusters(z: np.ndarray, gap: float) -> list[np.ndarray]:
    """Single-linkage clusters of points on the unit circle (by chord distance)."""
    z = np.asarray(z)
    n = z.size
    if n == 0:
        return []
    order = np.argsort(np.angle(z), kind="stable")
    labels = -np.ones(n, dtype=int)
    nlab = 0
    for i in order:
        if labels[i] >= 0:
            continue
        labels[i] = nlab
        stack = [i]
        while stack:
            j = stack.pop()
            close = np.nonzero((np.abs(z - z[j]) < gap) & (labels < 0))[0]
            labels[close] = nlab
            stack.extend(close.tolist())
        nlab += 1
    return [np.nonzero(labels == k)[0] for k in range(nlab)]


def unitary_eigenspaces(u: np.ndarray, gap: float = 1e-6) -> list[tuple[complex, np.ndarray]]:
    """Eigenspaces of a (numerically) unitary matrix via the complex Schur form.

    For a normal matrix the Schur vectors are eigenvectors, so grouping
    them by the clustered diagonal of ``T`` gives orthonormal eigenspace
    bases.
    """
    t, z = sla.schur(np.asarray(u, dtype=complex), output="complex")
    ev = np.diag(t)
    out = []
    for idx in unit_circle_clusters(ev, gap):
        out.append((complex(np.mean(ev[idx])), orthonormalize(z[:, idx], rank=len(idx))))
    return out
