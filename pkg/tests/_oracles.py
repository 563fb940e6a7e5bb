"""Independent brute-force references used by the tests.

Nothing here touches the scattering engine: commutants come from null
spaces of commutator maps, algebra dimensions from closing a span under
products, and lattice probabilities from full dense matrices or sampling.
"""

import numpy as np
import scipy.linalg as sla


def commutator_map(gens):
    """Stacked matrices of ``X -> [X, M_i]`` acting on row-major ``vec(X)``."""
    d = gens[0].shape[0]
    eye = np.eye(d)
    return np.vstack([np.kron(eye, m.T) - np.kron(m, eye) for m in gens])


def commutant_dimension(gens, tol=1e-9):
    s = np.linalg.svd(commutator_map(gens), compute_uv=False)
    d2 = gens[0].shape[0] ** 2
    return d2 - int(np.sum(s > tol * max(1.0, s[0])))


def commutant_basis(gens, tol=1e-9):
    d = gens[0].shape[0]
    ns = sla.null_space(commutator_map(gens), rcond=tol)
    return [ns[:, j].reshape(d, d) for j in range(ns.shape[1])]


def _span_basis(mats, tol=1e-9):
    if not mats:
        return np.zeros((0, 0))
    a = np.array([m.ravel() for m in mats]).T
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    return u[:, s > tol * max(1.0, s[0])]


def algebra_span(gens, tol=1e-9, max_rounds=64):
    """Orthonormal basis (columns, vectorized) of the algebra generated by ``gens``."""
    d = gens[0].shape[0]
    basis = _span_basis(list(gens), tol)
    for _ in range(max_rounds):
        mats = [basis[:, j].reshape(d, d) for j in range(basis.shape[1])]
        prods = [a @ b for a in mats for b in gens]
        new = _span_basis(mats + prods, tol)
        if new.shape[1] == basis.shape[1]:
            return new
        basis = new
    raise RuntimeError("span closure did not stabilize")


def algebra_dimension(gens, tol=1e-9):
    return algebra_span(gens, tol).shape[1]


def span_dimension(mats, tol=1e-9):
    return _span_basis(list(mats), tol).shape[1]


def in_span(basis, m, tol=1e-8):
    v = m.ravel()
    return np.linalg.norm(v - basis @ (basis.conj().T @ v)) <= tol * max(1.0, np.linalg.norm(v))


def random_projection(rng, d, r):
    a = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    q, _ = np.linalg.qr(a)
    return q


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


def random_density(rng, d, rank=None):
    rank = d if rank is None else rank
    a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_state(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_algebra_element(rng, gens, terms=4, max_len=3):
    d = gens[0].shape[0]
    out = np.zeros((d, d), dtype=complex)
    for _ in range(terms):
        word = [gens[j] for j in rng.integers(0, len(gens), rng.integers(1, max_len + 1))]
        out += (rng.normal() + 1j * rng.normal()) * np.linalg.multi_dot(word + [np.eye(d)])
    return out


def _dft_projections(d, wp):
    n = np.arange(d)
    f = np.exp(2j * np.pi * np.outer(n, n) / d) / np.sqrt(d)
    return [f[:, mu * wp:(mu + 1) * wp] @ f[:, mu * wp:(mu + 1) * wp].conj().T for mu in range(d // wp)]


def naive_p_agree(rho, d, wx, wp):
    """``sum tr[(PX PP PX)^2 rho]`` from full ``d x d`` projectors.

    ``rho=None`` means ``I/d``; then ``tr[(PX PP PX)^2] = tr[PX PP PX PP]``
    is evaluated as the sum of ``|PP_ij|^2`` over ``i, j`` in the cell,
    which is exact because ``PX`` is diagonal.
    """
    pps = _dft_projections(d, wp)
    total = 0.0
    for nu in range(d // wx):
        mask = np.zeros(d)
        mask[nu * wx:(nu + 1) * wx] = 1
        if rho is None:
            w = np.outer(mask, mask)
            total += sum(float(np.sum(w * np.abs(pp) ** 2)) for pp in pps) / d
            continue
        px = np.diag(mask)
        for pp in pps:
            m = px @ pp @ px
            total += float(np.trace(m @ m @ rho).real)
    return total


def check_scatter_claims(p1, p2, out, atol=1e-9):
    """Pieces partition each side, pair up with a shared lambda, and reflect.

    Returns the largest violation found (0 for an exact decomposition).
    """
    a, b = p1.matrix, p2.matrix
    worst = 0.0
    for proj, pieces in ((a, out.pieces1), (b, out.pieces2)):
        mats = [p.matrix for _, p in pieces]
        worst = max(worst, float(np.abs(sum(mats) - proj).max()))
        for i, x in enumerate(mats):
            for j, y in enumerate(mats):
                if i != j:
                    worst = max(worst, float(np.abs(x @ y).max()))
        if sum(p.rank for _, p in pieces) != round(np.trace(proj).real):
            return np.inf
    l1 = [lam for lam, _ in out.pieces1 if lam > 0]
    l2 = [lam for lam, _ in out.pieces2 if lam > 0]
    if l1 != l2:
        return np.inf
    for lam, x in out.pieces1:
        worst = max(worst, float(np.abs(x.matrix @ b @ x.matrix - lam * x.matrix).max()))
    for lam, y in out.pieces2:
        worst = max(worst, float(np.abs(y.matrix @ a @ y.matrix - lam * y.matrix).max()))
    for (la, x), (_, y) in zip(out.pieces1, out.pieces2):
        if la > 0 and x.rank != y.rank:
            return np.inf
    for la, x in out.pieces1:
        for lb, y in out.pieces2:
            if la != lb or la == 0:
                worst = max(worst, float(np.abs(x.matrix @ y.matrix).max()))
    return worst


def monte_carlo_p_agree(rng, psi, d, wx, wp, shots):
    """Sample the Born rule for position, momentum, position on a pure state."""
    n = np.arange(d)
    f = np.exp(2j * np.pi * np.outer(n, n) / d) / np.sqrt(d)
    kx, kp = d // wx, d // wp
    agree = 0
    # First position outcome.
    pos = np.abs(psi) ** 2
    p_nu = pos.reshape(kx, wx).sum(axis=1)
    nu1 = rng.choice(kx, size=shots, p=p_nu / p_nu.sum())
    for a in range(kx):
        mask = nu1 == a
        count = int(mask.sum())
        if count == 0:
            continue
        s1 = np.zeros(d, dtype=complex)
        s1[a * wx:(a + 1) * wx] = psi[a * wx:(a + 1) * wx]
        s1 /= np.linalg.norm(s1)
        amp = f.conj().T @ s1
        p_mu = (np.abs(amp) ** 2).reshape(kp, wp).sum(axis=1)
        mus = rng.choice(kp, size=count, p=p_mu / p_mu.sum())
        for b in range(kp):
            cnt = int((mus == b).sum())
            if cnt == 0:
                continue
            sel = np.zeros(d, dtype=complex)
            sel[b * wp:(b + 1) * wp] = amp[b * wp:(b + 1) * wp]
            s2 = f @ sel
            s2 /= np.linalg.norm(s2)
            p_nu2 = (np.abs(s2) ** 2).reshape(kx, wx).sum(axis=1)
            nu2 = rng.choice(kx, size=cnt, p=p_nu2 / p_nu2.sum())
            agree += int((nu2 == a).sum())
    return agree / shots
