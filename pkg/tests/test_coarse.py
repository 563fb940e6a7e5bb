import numpy as np
import pytest

from _oracles import random_density, random_state
from irrepscatter.coarse import (
    PartialBipartitionTable,
    probability_distortion,
    pull_back,
    push_forward,
    skl_from_partial_bpt,
    trace_out_partial,
)
from irrepscatter.errors import DimensionMismatch, InputError, NotInSpan, NotOrthonormal
from irrepscatter.fixtures import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    WEATHER_PROBS,
    qutrit_expected,
    qutrit_pbpt,
    singlet_triplet_pbpt,
    spin_matrices,
    two_spin_total,
    weather_clothing,
    weather_rectangular,
)
from irrepscatter.reduction import partial_trace


def test_qutrit_reduced_state():
    rng = np.random.default_rng(2)
    pbpt = qutrit_pbpt()
    for _ in range(10):
        psi = random_state(rng, 3)
        out = trace_out_partial(np.outer(psi, psi.conj()), pbpt).matrix
        np.testing.assert_allclose(out, qutrit_expected(psi), atol=1e-12)


def test_qutrit_distortion_of_x():
    rng = np.random.default_rng(4)
    basis = skl_from_partial_bpt(qutrit_pbpt())
    x = push_forward(PAULI_X, basis)
    for _ in range(10):
        psi = random_state(rng, 3)
        dist = probability_distortion(x, basis, np.outer(psi, psi.conj()))
        top = dist[0]
        assert top.eigenvalue == pytest.approx(1.0)
        assert top.difference == pytest.approx(abs(psi[2]) ** 2 / 2, abs=1e-12)
        assert sum(d.ambient for d in dist) == pytest.approx(1.0)
        assert sum(d.reduced for d in dist) == pytest.approx(1.0)


def test_qutrit_y_basis_pushes_to_spin1():
    basis = skl_from_partial_bpt(qutrit_pbpt(y_basis=True))
    sx, _, _ = spin_matrices(1)
    np.testing.assert_allclose(push_forward(PAULI_X, basis), sx, atol=1e-14)


def test_operator_system_basis():
    basis = skl_from_partial_bpt(qutrit_pbpt())
    np.testing.assert_allclose(basis.identity(), np.eye(3), atol=0)
    assert basis.norms[(1, 1)] == 2 and basis.norms[(0, 1)] == 1
    # closed under adjoints, not under products: S_10 S_01 is not in the span
    s01, s10 = basis.entries[(0, 1)], basis.entries[(1, 0)]
    np.testing.assert_allclose(s01.conj().T, s10, atol=0)
    _, res = pull_back(s10 @ s01, basis)
    assert res > 0.1


@pytest.mark.parametrize("o", [PAULI_X, PAULI_Y, PAULI_Z, np.eye(2)])
def test_pull_push_roundtrip(o):
    basis = skl_from_partial_bpt(qutrit_pbpt())
    o_b, res = pull_back(push_forward(o, basis), basis)
    np.testing.assert_allclose(o_b, o, atol=1e-14)
    assert res < 1e-14


def test_expectations_preserved():
    rng = np.random.default_rng(9)
    basis = skl_from_partial_bpt(weather_clothing())
    rho = random_density(rng, 4)
    rho_b = trace_out_partial(rho, basis.pbpt).matrix
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    o_b = a + a.conj().T
    o = push_forward(o_b, basis)
    assert np.trace(o @ rho).real == pytest.approx(np.trace(o_b @ rho_b).real, abs=1e-12)


def test_weather_rectangular():
    rho = np.diag(WEATHER_PROBS)
    pbpt = weather_rectangular()
    assert pbpt.is_rectangular
    np.testing.assert_allclose(np.diag(trace_out_partial(rho, pbpt).matrix).real, [0.35, 0.65], atol=1e-14)
    np.testing.assert_allclose(np.diag(trace_out_partial(rho, pbpt, keep="A").matrix).real, [0.2, 0.8],
                               atol=1e-14)


def test_weather_clothing():
    rho = np.diag(WEATHER_PROBS)
    pbpt = weather_clothing()
    assert not pbpt.is_rectangular
    np.testing.assert_allclose(trace_out_partial(rho, pbpt).matrix, np.diag([0.05, 0.45, 0.5]), atol=1e-14)
    np.testing.assert_allclose(trace_out_partial(rho, pbpt, keep="A").matrix, np.diag([0.15, 0.85]),
                               atol=1e-14)


def test_rectangular_is_partial_trace():
    rng = np.random.default_rng(6)
    e = np.eye(6, dtype=complex)
    # cell (i, k) = |i> (x) |k> on C^2 (x) C^3
    pbpt = PartialBipartitionTable(("a", "b"), ("x", "y", "z"), {(i, k): e[3 * i + k] for i in range(2) for k in range(3)})
    rho = random_density(rng, 6)
    np.testing.assert_allclose(trace_out_partial(rho, pbpt).matrix, partial_trace(rho, (2, 3)), atol=1e-12)
    np.testing.assert_allclose(trace_out_partial(rho, pbpt, keep="A").matrix,
                               partial_trace(rho, (2, 3), keep="A"), atol=1e-12)


def test_singlet_triplet():
    basis = skl_from_partial_bpt(singlet_triplet_pbpt())
    jx, jy, jz = two_spin_total()
    for j in (jx, jy, jz):
        assert pull_back(j, basis)[1] <= 1e-10
    assert pull_back(jx @ jx, basis)[1] > 0.1
    with pytest.raises(NotInSpan):
        probability_distortion(jx @ jx, basis, np.eye(4) / 4)


def test_singlet_triplet_spin1_operators():
    basis = skl_from_partial_bpt(singlet_triplet_pbpt())
    jx, jy, jz = two_spin_total()
    sx, sy, sz = spin_matrices(1)
    np.testing.assert_allclose(pull_back(jz, basis)[0], sz, atol=1e-12)
    np.testing.assert_allclose(pull_back(jx, basis)[0], sx, atol=1e-12)


def test_table_validation():
    e = np.eye(2, dtype=complex)
    with pytest.raises(NotOrthonormal):
        PartialBipartitionTable(("r",), ("a", "b"), {(0, 0): e[0], (0, 1): e[0]})
    with pytest.raises(InputError):
        PartialBipartitionTable(("r",), ("a", "b"), {(0, 0): e[0]})
    with pytest.raises(InputError):
        PartialBipartitionTable(("r",), ("a",), {(0, 3): e[0]})
    with pytest.raises(DimensionMismatch):
        PartialBipartitionTable(("r",), ("a", "b"), {(0, 0): e[0], (0, 1): np.eye(3)[1]})
    grid = PartialBipartitionTable.from_grid(("r", "s"), ("a",), [[e[0]], [e[1]]])
    assert grid.is_rectangular
    with pytest.raises(DimensionMismatch):
        trace_out_partial(np.eye(3) / 3, grid)
