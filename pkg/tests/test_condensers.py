import math

import pytest
from hypothesis import given, strategies as st

from wienerinf.capacity import normalized_grid_capacity
from wienerinf.condensers import (DualWindow, ShellWindow, Unsupported, complement_atoms,
                                  dual_capacity, grid_fallback, window_capacity)
from wienerinf.geometry import (Annulus, Ball, ClosedBall, Complement, Condenser, Exponents,
                                ValidationError, Weight)
from wienerinf.families import Example71

E22 = Exponents(2, 2)


def test_radial_atom_uses_series_rule():
    at = complement_atoms(Complement(Annulus(1, 2, closed=True)))
    w = ShellWindow(math.log(0.5), math.log(3), math.log(0.25), math.log(6))
    est = window_capacity(at, w, E22)
    expect = 2 * math.pi / math.log(4) + 2 * math.pi / math.log(3)
    assert est.method == "exact"
    assert est.value == pytest.approx(expect, rel=1e-12)


@given(st.floats(1.1, 3), st.floats(1.1, 3), st.sampled_from([(2, 2.0), (2, 3.0), (3, 3.0)]))
def test_radial_atom_never_exceeds_inner_shell(k1, k2, np_):
    n, p = np_
    e = Exponents(n, p)
    at = complement_atoms(Complement(Annulus(1, k1, closed=True)))
    w = ShellWindow(0.0, math.log(k1), -math.log(k2), math.log(k1 * k2))
    assert window_capacity(at, w, e).value > 0


def test_ball_atom_bounds_bracket_grid_value():
    at = complement_atoms(Complement(ClosedBall((3, 0), 0.5)))
    w = ShellWindow(math.log(2), math.log(4), 0.0, math.log(8))
    est = window_capacity(at, w, E22)
    lo, hi = est.analytic_bounds
    grid = normalized_grid_capacity(Condenser(ClosedBall((3, 0), 0.5), Annulus(1, 8)), E22,
                                    1 / 128).value
    assert lo <= grid <= hi


def test_ring_mode_bounds_for_sparse_balls():
    at = complement_atoms(Example71(2).descriptor())
    for r in (1.5, 10.0, 1e3, 1e5):
        w = ShellWindow(math.log(r), 2 * math.log(r), math.log(r / 2), r * math.log(4))
        est = window_capacity(at, w, E22)
        if est.analytic_bounds is not None:
            lo, hi = est.analytic_bounds
            assert 0 <= lo <= est.value <= hi


def test_dual_window_bounded_complement_is_zero():
    at = complement_atoms(Complement(ClosedBall((0, 0), 1)))
    est = dual_capacity(at, DualWindow(math.log(3)), E22)
    assert est.value == 0.0


def test_window_validation():
    with pytest.raises(ValidationError):
        ShellWindow(1.0, 0.0, -1.0, 2.0)
    with pytest.raises(ValidationError):
        ShellWindow(0.0, 1.0, 0.5, 2.0)


def test_grid_fallback_limits():
    with pytest.raises(Unsupported):
        grid_fallback(ClosedBall((0, 0), 1), Ball((0, 0), 1000), E22, Weight.constant(), 1000, 1 / 32)
