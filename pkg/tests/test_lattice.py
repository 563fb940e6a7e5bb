import math

import numpy as np
import pytest

from _oracles import monte_carlo_p_agree, naive_p_agree, random_density, random_state
from irrepscatter.errors import CapExceeded, DimensionMismatch, InputError
from irrepscatter.lattice import (
    LatticeConfig,
    NonDivisor,
    coarse_projections,
    curve_grid,
    delta_closed,
    delta_fn,
    delta_sum,
    diagonal_grid,
    divisor_pairs,
    divisors,
    on_curve_value,
    p_agree_bounds,
    p_agree_closed,
    p_agree_direct,
    p_agree_state,
    regime_scan,
)


def test_config_validation():
    with pytest.raises(NonDivisor):
        LatticeConfig(12, 5, 3)
    with pytest.raises(InputError):
        LatticeConfig(12, 0, 3)
    cfg = LatticeConfig(12, 3, 4, dx=0.5)
    assert cfg.k_x == 4 and cfg.k_p == 3 and cfg.on_curve
    assert cfg.length == 6.0
    assert cfg.momentum_unit() == pytest.approx(2 * math.pi / 6)
    assert LatticeConfig(12, 3, 3).momentum_unit() is None


def test_projections_resolve_identity():
    xs, ps = coarse_projections(LatticeConfig(12, 3, 4))
    np.testing.assert_allclose(sum(xs), np.eye(12), atol=1e-12)
    np.testing.assert_allclose(sum(ps), np.eye(12), atol=1e-12)
    for p in ps:
        np.testing.assert_allclose(p @ p, p, atol=1e-12)


@pytest.mark.parametrize("d", [4, 6, 12])
def test_state_value_matches_naive(rng, d):
    rho = random_density(rng, d)
    for a, b in divisor_pairs(d):
        assert p_agree_state(rho, LatticeConfig(d, a, b)) == pytest.approx(naive_p_agree(rho, d, a, b), abs=1e-12)


def test_closed_matches_naive_small():
    for d in (4, 8, 9, 12):
        for a, b in divisor_pairs(d):
            want = naive_p_agree(None, d, a, b)
            assert p_agree_closed(LatticeConfig(d, a, b)) == pytest.approx(want, abs=1e-12)


def test_closed_matches_block_form_up_to_64():
    worst = 0.0
    for d in range(4, 65):
        for a, b in divisor_pairs(d):
            cfg = LatticeConfig(d, a, b)
            worst = max(worst, abs(p_agree_closed(cfg) - p_agree_direct(cfg)))
    assert worst < 1e-10


def test_monte_carlo_agrees_with_state_value():
    rng = np.random.default_rng(3)
    d, wx, wp = 16, 4, 2
    psi = random_state(rng, d)
    exact = p_agree_state(np.outer(psi, psi.conj()), LatticeConfig(d, wx, wp))
    shots = 40000
    est = monte_carlo_p_agree(rng, psi, d, wx, wp, shots)
    assert abs(est - exact) < 5 * math.sqrt(exact * (1 - exact) / shots)


def test_trivial_limits():
    # one position cell: agreement is certain
    assert p_agree_closed(LatticeConfig(16, 16, 1)) == pytest.approx(1.0)
    assert p_agree_closed(LatticeConfig(16, 16, 4)) == pytest.approx(1.0)
    # finest grain in both: position forgotten after an exact momentum measurement
    assert p_agree_closed(LatticeConfig(16, 1, 1)) == pytest.approx(1 / 16)


def test_on_curve_value_table():
    # values of the plateau table at d = 4096
    table = {1: 1.00, 2: 0.703, 3: 0.675, 4: 0.667, 15: 0.657, 16: 0.656, 32: 0.656}
    for w, v in table.items():
        assert round(on_curve_value(4096, w), 3) == v


def test_on_curve_value_equals_closed_form():
    for d in (16, 36, 64):
        for w in divisors(d):
            assert on_curve_value(d, w) == pytest.approx(p_agree_closed(LatticeConfig(d, d // w, w)), abs=1e-12)


def test_plateau_at_1024():
    assert p_agree_closed(LatticeConfig(1024, 32, 32)) == pytest.approx(0.656, abs=5e-4)


@pytest.mark.parametrize("d", [256, 1024])
def test_bounds_hold(d):
    checked = 0
    for w in divisors(d):
        b = p_agree_bounds(d, w)
        v = p_agree_closed(LatticeConfig(d, w, w))
        if b.upper is not None:
            assert v <= b.upper + 1e-12
            checked += 1
        if b.lower is not None:
            assert v >= b.lower - 1e-12
            checked += 1
    assert checked >= 4


def test_bounds_applicability():
    b = p_agree_bounds(256, 16)
    assert b.upper is None and b.lower is None
    assert p_agree_bounds(256, 4).upper == pytest.approx(16 / 256)
    # w^2/d = 2 is the first admissible lower bound
    assert p_agree_bounds(512, 32).lower is not None
    with pytest.raises(NonDivisor):
        p_agree_bounds(256, 3)


def test_delta_function():
    for q in (1, 3, 8):
        for x in (0.0, 0.3, 2.0, 5.5):
            assert delta_fn(q, x) == pytest.approx(delta_closed(q, x), abs=1e-12)
    assert delta_sum(4, 0) == pytest.approx(1.0)
    assert abs(delta_fn(4, 1)) < 1e-15
    with pytest.raises(InputError):
        delta_fn(0, 1.0)


def test_grids_and_scan():
    assert divisors(12) == [1, 2, 3, 4, 6, 12]
    assert diagonal_grid(4) == [(1, 1), (2, 2), (4, 4)]
    assert curve_grid(4) == [(4, 1), (2, 2), (1, 4)]
    rows = regime_scan(64, diagonal_grid(64), direct=True, workers=2)
    assert [r.w_x for r in rows] == divisors(64)
    for r in rows:
        assert abs(r.closed - r.direct) < 1e-10
    assert rows[0].upper is not None
    off = regime_scan(64, [(2, 8)])
    assert off[0].upper is None and off[0].direct is None and off[0].on_curve is False


def test_scan_skips_direct_above_cap():
    rows = regime_scan(512, [(512, 512)], direct=True)
    assert rows[0].direct is None


def test_caps_and_dimensions():
    with pytest.raises(CapExceeded):
        p_agree_direct(LatticeConfig(8192, 8192, 8192))
    with pytest.raises(DimensionMismatch):
        p_agree_state(np.eye(3) / 3, LatticeConfig(4, 2, 2))
