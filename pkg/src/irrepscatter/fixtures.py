"""Worked examples used by the tests, the demos and the shipped JSON corpus.

Every builder returns plain numpy arrays (or partial bipartition tables for
the coarse-graining examples) so that callers can feed them to any stage
of the pipeline.
"""

from __future__ import annotations

import numpy as np

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
PLUS = (KET0 + KET1) / np.sqrt(2)
MINUS = (KET0 - KET1) / np.sqrt(2)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def kron(*ops) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def ket(*factors) -> np.ndarray:
    out = np.array([1.0 + 0j])
    for f in factors:
        out = np.kron(out, f)
    return out


def spin_matrices(j: float):
    """``(Sx, Sy, Sz)`` for spin ``j`` in the basis ``m = j, j-1, ..., -j``."""
    n = int(round(2 * j + 1))
    m = j - np.arange(n)
    sp = np.zeros((n, n), dtype=complex)
    for a in range(1, n):
        # <m+1| S+ |m> = sqrt(j(j+1) - m(m+1))
        sp[a - 1, a] = np.sqrt(j * (j + 1) - m[a] * (m[a] + 1))
    sx = (sp + sp.conj().T) / 2
    sy = (sp - sp.conj().T) / 2j
    sz = np.diag(m).astype(complex)
    return sx, sy, sz


def site_operator(op: np.ndarray, site: int, n: int, local_dim: int = 2) -> np.ndarray:
    eye = np.eye(local_dim)
    return kron(*[op if s == site else eye for s in range(n)])


# -- three qubits --------------------------------------------------------


def three_qubit_generators():
    """``H_int = |++0><++0| + |+11><+11|`` and ``H_z1 = Z (x) I (x) I``."""
    a = ket(PLUS, PLUS, KET0)
    b = ket(PLUS, KET1, KET1)
    h_int = np.outer(a, a.conj()) + np.outer(b, b.conj())
    h_z1 = kron(PAULI_Z, np.eye(2), np.eye(2))
    return h_int, h_z1


def three_qubit_hamiltonian(eps: float) -> np.ndarray:
    h_int, h_z1 = three_qubit_generators()
    return h_int + eps * h_z1


def three_qubit_spectrum(eps: float) -> np.ndarray:
    """Reference spectrum of ``H(eps)``, sorted."""
    block = np.array([[0.5 + eps, 0.5], [0.5, 0.5 - eps]])
    ev = np.linalg.eigvalsh(block)
    return np.sort(np.concatenate([[eps, eps, -eps, -eps], ev, ev]))


def collective_rotations(n: int = 3):
    """Total spin components ``(Jx, Jy, Jz)`` of ``n`` spin-1/2 particles."""
    half = [PAULI_X / 2, PAULI_Y / 2, PAULI_Z / 2]
    return tuple(sum(site_operator(s, i, n) for i in range(n)) for s in half)


# -- Heisenberg chains ---------------------------------------------------


def heisenberg_coupling(i: int, j: int, n: int) -> np.ndarray:
    """``S_i . S_j`` for spin-1/2 sites ``i`` and ``j`` of an ``n``-site chain."""
    half = [PAULI_X / 2, PAULI_Y / 2, PAULI_Z / 2]
    return sum(site_operator(s, i, n) @ site_operator(s, j, n) for s in half)


def heisenberg_generators(n: int):
    """Nearest-neighbour couplings ``S_i . S_{i+1}`` of an open chain."""
    return [heisenberg_coupling(i, i + 1, n) for i in range(n - 1)]


def heisenberg3_block(e12: float, e23: float) -> np.ndarray:
    """Reference 2x2 block acting on the two total-spin-1/2 copies."""
    s3 = np.sqrt(3)
    return 0.25 * np.array([[-3 * e23, s3 * e12], [s3 * e12, e23 - 2 * e12]])


def heisenberg3_scalar(e12: float, e23: float) -> float:
    """Reference eigenvalue on the total-spin-3/2 sector."""
    return 0.25 * (e12 + e23)


# -- glued binary trees --------------------------------------------------

GLUED_TREE_EDGES = [(1, 2), (1, 3), (2, 4), (2, 5), (3, 6), (3, 7), (4, 8), (5, 8),
                    (6, 9), (7, 9), (8, 10), (9, 10), (6, 7)]
GLUED_TREE_PI1 = [(2, 3), (4, 7), (5, 6), (8, 9)]
GLUED_TREE_PI2 = [(4, 5)]


def permutation_unitary(cycles, d: int) -> np.ndarray:
    """Permutation matrix of a product of disjoint transpositions (1-based labels)."""
    perm = np.arange(d)
    for a, b in cycles:
        perm[a - 1], perm[b - 1] = b - 1, a - 1
    u = np.zeros((d, d), dtype=complex)
    u[perm, np.arange(d)] = 1
    return u


def glued_tree_hamiltonian() -> np.ndarray:
    """``H = -sum_edges (U((ij)) - I)``, the graph Laplacian."""
    d = 10
    h = np.zeros((d, d), dtype=complex)
    for a, b in GLUED_TREE_EDGES:
        h -= permutation_unitary([(a, b)], d) - np.eye(d)
    return h


def glued_tree_generators():
    d = 10
    return [permutation_unitary(GLUED_TREE_PI1, d), permutation_unitary(GLUED_TREE_PI2, d)]


def hermitian_generators(unitaries):
    """Hermitian generators ``U + U^H`` and ``i(U - U^H)`` of the algebra spanned by unitaries."""
    out = []
    for u in unitaries:
        out.append((u + u.conj().T) / 2)
        anti = 1j * (u - u.conj().T) / 2
        if np.max(np.abs(anti)) > 1e-12:
            out.append(anti)
    return out


# -- spin-l (x) spin-1/2 encodings ----------------------------------------


def spin_l_half_generators(l: int):
    """``L_z (x) S_z`` and ``I (x) S_x`` on spin-l times spin-1/2."""
    _, _, lz = spin_matrices(l)
    sx, _, sz = spin_matrices(0.5)
    return np.kron(lz, sz), np.kron(np.eye(2 * l + 1), sx)


def spin_l_half_hamiltonian(l: int, eps: float) -> np.ndarray:
    a, b = spin_l_half_generators(l)
    return a + eps * b


def spin_l_half_block(q: int, eps: float) -> np.ndarray:
    return 0.5 * np.array([[q, eps], [eps, -q]])


# -- T12 / T23 -----------------------------------------------------------


def hopping_generators():
    """``T12 = |1><2| + h.c.`` and ``T23 = |2><3| + h.c.`` on a qutrit."""
    t12 = np.zeros((3, 3), dtype=complex)
    t23 = np.zeros((3, 3), dtype=complex)
    t12[0, 1] = t12[1, 0] = 1
    t23[1, 2] = t23[2, 1] = 1
    return t12, t23


# -- a network that needs the minimality repair --------------------------


def holonomy_projections(phi: float = np.pi / 2):
    """Three pairwise reflecting rank-2 projections on C^6 with a nontrivial cycle.

    Going around the triangle A -> B -> C -> A multiplies the two basis
    directions by opposite phases, so the rank-2 vertices are not minimal:
    the projections generate L(C^3) + L(C^3) and the correct network
    has rank-1 vertices.
    """
    e = np.eye(6, dtype=complex)
    a = np.column_stack([e[0], e[1]])
    b = np.column_stack([(e[0] + e[2]) / np.sqrt(2), (e[1] + e[3]) / np.sqrt(2)])
    c = np.column_stack([(e[0] + np.exp(1j * phi) * e[2] + e[4]) / np.sqrt(3),
                         (e[1] + np.exp(-1j * phi) * e[3] + e[5]) / np.sqrt(3)])
    return [q @ q.conj().T for q in (a, b, c)]


# -- registry ------------------------------------------------------------


def decomposition_fixtures() -> dict:
    """Named generator sets with their expected ``(rows, cols)`` block shapes."""
    s3 = heisenberg_generators(3)
    s4 = heisenberg_generators(4)
    out = {
        "three_qubit": (list(three_qubit_generators()), [(2, 1), (2, 1), (2, 2)]),
        "heisenberg3": (s3, [(4, 1), (2, 2)]),
        "heisenberg4": (s4, [(5, 1), (3, 3), (1, 2)]),
        "glued_tree": (glued_tree_generators(), [(5, 1), (3, 1), (1, 2)]),
        "hopping": (list(hopping_generators()), [(1, 3)]),
        "holonomy": (holonomy_projections(), [(1, 3), (1, 3)]),
        "collective3": (list(collective_rotations(3)), [(1, 4), (2, 2)]),
    }
    for l in (1, 2, 3):
        out[f"spin{l}_half"] = (list(spin_l_half_generators(l)), [(1, 1), (1, 1)] + [(2, 2)] * l)
    return out


# -- coarse-graining tables ----------------------------------------------


def _coarse():
    from . import coarse
    return coarse


def qutrit_pbpt(y_basis: bool = False):
    """Qutrit (ambient order ``|1>, |0>, |-1>``) coarse-grained to a qubit.

    Row 0 holds ``|0>`` in column 0 and ``e1`` in column 1, row 1 holds
    ``e2`` in column 1.  By default ``e1 = |1>`` and ``e2 = |-1>``; with
    ``y_basis`` they are ``(|1> + |-1>)/sqrt2`` and ``(|1> - |-1>)/sqrt2``.
    """
    e = np.eye(3, dtype=complex)
    up, zero, down = e[0], e[1], e[2]
    if y_basis:
        e1, e2 = (up + down) / np.sqrt(2), (up - down) / np.sqrt(2)
    else:
        e1, e2 = up, down
    return _coarse().PartialBipartitionTable(("r0", "r1"), ("0", "1"),
                                             {(0, 0): zero, (0, 1): e1, (1, 1): e2})


def qutrit_expected(alpha) -> np.ndarray:
    """Reduced qubit state for ``psi = a1 |1> + a0 |0> + a_1 |-1>``."""
    a1, a0, am = alpha
    return np.array([[abs(a0) ** 2, np.conj(a1) * a0],
                     [np.conj(a0) * a1, abs(a1) ** 2 + abs(am) ** 2]])


# Ambient order of the two-bit weather space: sw, sc, rw, rc
# (sunny/rainy, warm/cold), encoded as up-up, up-down, down-up, down-down.
WEATHER_PROBS = np.array([0.05, 0.30, 0.15, 0.50])


def weather_rectangular():
    e = np.eye(4, dtype=complex)
    sw, sc, rw, rc = e
    return _coarse().PartialBipartitionTable(("warm", "cold"), ("sunny", "rainy"),
                                             {(0, 0): sw, (1, 0): sc, (0, 1): rw, (1, 1): rc})


def weather_clothing():
    """Rows: hat / no hat, columns: shirt, jacket, coat."""
    e = np.eye(4, dtype=complex)
    sw, sc, rw, rc = e
    return _coarse().PartialBipartitionTable(("no hat", "hat"), ("shirt", "jacket", "coat"),
                                             {(0, 1): rw, (1, 0): sw, (1, 1): sc, (1, 2): rc})


def singlet_triplet_pbpt():
    """Two spin-1/2: row ``s`` holds the singlet in column ``0``, row ``t`` the triplet."""
    uu, ud, du, dd = np.eye(4, dtype=complex)
    return _coarse().PartialBipartitionTable(
        ("s", "t"), ("1", "0", "-1"),
        {(0, 1): (ud - du) / np.sqrt(2),
         (1, 0): uu, (1, 1): (ud + du) / np.sqrt(2), (1, 2): dd})


def two_spin_total():
    """``(Jx, Jy, Jz)`` of two spin-1/2 particles."""
    return collective_rotations(2)


# -- purity experiments --------------------------------------------------


def big_spin_setup(l: int = 100, eps: float = 1.0):
    """Spin-l (x) spin-1/2 with ``H = -eps L_z (x) sigma_z``.

    Returns ``(H, psi0, generators)``: ``psi0 = |m_x = l> (x) |+>`` and the
    generators ``I (x) sigma_x``, ``I (x) sigma_z`` whose algebra gives the
    partial trace onto the spin-1/2.
    """
    lx, _, lz = spin_matrices(l)
    w, v = np.linalg.eigh(lx)
    mx = v[:, -1]
    h = -eps * np.kron(lz, PAULI_Z)
    psi0 = np.kron(mx, PLUS)
    eye = np.eye(2 * l + 1)
    return h, psi0, [np.kron(eye, PAULI_X), np.kron(eye, PAULI_Z)]


def hydrogen_setup(l: int = 3, field: float = 0.1):
    """Spin-l (x) spin-1/2 (x) spin-1/2 under ``H = field (S1y + S2y)``.

    Returns ``(H, psi0, generators)``.  ``psi0`` is the even superposition
    of the singlet and triplet ``j = l, m = 0`` states and the generators
    ``Jz``, ``Jx`` of total rotations; the reduction uses the commutant,
    i.e. the transposed table.
    """
    ls = spin_matrices(l)
    s = spin_matrices(0.5)
    i2, il = np.eye(2), np.eye(2 * l + 1)
    s1 = [kron(il, a, i2) for a in s]
    s2 = [kron(il, i2, a) for a in s]
    jl = [kron(a, i2, i2) for a in ls]
    j = [jl[c] + s1[c] + s2[c] for c in range(3)]
    stot = [s1[c] + s2[c] for c in range(3)]
    j2 = sum(x @ x for x in j)
    s2tot = sum(x @ x for x in stot)
    # j(j+1), S(S+1) and m are integers here, so this combination separates them.
    label = j2 + 100 * s2tot + 1000 * (j[2] @ j[2])
    w, v = np.linalg.eigh(label)

    def state(jj, ss, m):
        target = jj * (jj + 1) + 100 * ss * (ss + 1) + 1000 * m * m
        idx = np.nonzero(np.abs(w - target) < 1e-6)[0]
        vec = v[:, idx[0]]
        return vec * (abs(vec[np.argmax(np.abs(vec))]) / vec[np.argmax(np.abs(vec))])

    psi0 = (state(l, 0, 0) + state(l, 1, 0)) / np.sqrt(2)
    h = field * (s1[1] + s2[1])
    return h, psi0, [j[2], j[0]]


# -- on-disk corpus ------------------------------------------------------


def _problem(generators: dict, operators: dict | None = None, include_identity: bool = False):
    from .io import ProblemFile
    gens = [(n, np.asarray(m, dtype=complex)) for n, m in generators.items()]
    ops = {n: np.asarray(m, dtype=complex) for n, m in (operators or {}).items()}
    return ProblemFile(gens[0][1].shape[0], gens, ops, include_identity)


def corpus_problems() -> dict:
    """Problem files of the shipped corpus, keyed by file stem."""
    h_int, h_z1 = three_qubit_generators()
    out = {
        "three_qubit": _problem({"H_int": h_int, "H_z1": h_z1},
                                {"H_eps_1": three_qubit_hamiltonian(1.0),
                                 "H_eps_0.25": three_qubit_hamiltonian(0.25),
                                 "rho_mixed": np.eye(8) / 8}),
        "heisenberg3": _problem({f"S{i + 1}.S{i + 2}": g for i, g in enumerate(heisenberg_generators(3))},
                                {"H_1_2": sum(e * g for e, g in zip((1, 2), heisenberg_generators(3)))}),
        "heisenberg4": _problem({f"S{i + 1}.S{i + 2}": g for i, g in enumerate(heisenberg_generators(4))}),
        "glued_tree": _problem(dict(zip(("U_pi1", "U_pi2"), glued_tree_generators())),
                               {"H": glued_tree_hamiltonian()}),
        "collective3": _problem(dict(zip(("Jx", "Jy", "Jz"), collective_rotations(3)))),
        "hopping": _problem(dict(zip(("T12", "T23"), hopping_generators()))),
        "identity4": _problem({"I": np.eye(4)}),
    }
    for l in (1, 2, 3):
        a, b = spin_l_half_generators(l)
        out[f"spin{l}_half"] = _problem({"LzSz": a, "Sx": b}, {"H_eps_0.7": a + 0.7 * b})
    h, psi, gens = hydrogen_setup()
    out["hydrogen_l3"] = _problem({"Jz": gens[0], "Jx": gens[1]},
                                  {"H": h, "rho0": np.outer(psi, psi.conj())})
    return out


def corpus_tables() -> dict:
    """Partial tables (with observables) and states of the shipped corpus."""
    from .io import encode_complex, pbpt_to_dict
    x = np.zeros((3, 3), dtype=complex)
    x[0, 1] = x[1, 0] = 1
    jx, jy, jz = two_spin_total()
    psi = np.array([0.6, 0.48, 0.64], dtype=complex)  # a1, a0, a-1 (normalized)
    return {
        "qutrit_pbpt": pbpt_to_dict(qutrit_pbpt(), {"X": x}),
        "qutrit_state": {"dim": 3, "psi": encode_complex(psi)},
        "weather_rect_pbpt": pbpt_to_dict(weather_rectangular()),
        "weather_clothing_pbpt": pbpt_to_dict(weather_clothing()),
        "weather_state": {"dim": 4, "rho": encode_complex(np.diag(WEATHER_PROBS))},
        "singlet_triplet_pbpt": pbpt_to_dict(singlet_triplet_pbpt(),
                                             {"Jx": jx, "Jy": jy, "Jz": jz, "Jx2": jx @ jx}),
        "two_spin_state": {"dim": 4, "psi": encode_complex(np.array([0.5, 0.5j, -0.5, 0.5]))},
    }


def build_corpus(directory) -> list:
    """Write every corpus file into ``directory``; returns the written paths."""
    from pathlib import Path

    from .io import write_json, write_problem
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for stem, problem in corpus_problems().items():
        path = directory / f"{stem}.json"
        write_problem(path, problem)
        written.append(path)
    for stem, data in corpus_tables().items():
        path = directory / f"{stem}.json"
        write_json(path, data)
        written.append(path)
    return written
