import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wienerinf.capacity import (GeometryError, grid_capacity, normalized_grid_capacity,
                                radial_capacity_exact, shell_capacity, truncated_capacity)
from wienerinf.estimates import (annulus_split_bound, corollary63_f, integrability_integral,
                                 duality_check, lemma73_constant, shell_cut_sandwich,
                                 poincare_constant_estimate, power_sum_holds, ring_capacity,
                                 ring_modulus)
from wienerinf.geometry import (Annulus, Ball, ClosedBall, Condenser, DomainError, Exponents,
                                HalfSpace, Intersection, Union, Weight, WholeSpace)
from wienerinf.radial import radial_capacity_1d_oracle
from wienerinf.solver import Grid, GridBudgetError

E22 = Exponents(2, 2)
O = (0.0, 0.0)


def test_radial_closed_forms():
    assert radial_capacity_exact(1, 2, E22) == pytest.approx(2 * math.pi / math.log(2), rel=1e-14)
    # n=3, p=2: 4 pi r R / (R - r)
    assert radial_capacity_exact(1, 2, Exponents(3, 2)) == pytest.approx(8 * math.pi, rel=1e-14)
    with pytest.raises(DomainError):
        radial_capacity_exact(2, 1, E22)


@given(st.sampled_from([2, 3]), st.floats(1.2, 5), st.floats(-1, 3),
       st.floats(0.1, 2), st.floats(1.1, 20))
def test_radial_formula_matches_1d_oracle(n, p, delta, r, k):
    R = r * k
    exact = shell_capacity(r, R, n, p, delta)
    oracle = radial_capacity_1d_oracle(r, R, n, p, delta, nodes=4000)
    assert oracle >= exact * (1 - 1e-9)
    assert oracle == pytest.approx(exact, rel=2e-3)


@given(st.sampled_from([2, 3]), st.floats(2, 5), st.floats(0.1, 2), st.floats(1.1, 20),
       st.floats(0.1, 10))
def test_radial_scaling_law(n, p, r, k, lam):
    delta = 2 * (p - n)
    a = shell_capacity(lam * r, lam * r * k, n, p, delta)
    b = shell_capacity(r, r * k, n, p, delta)
    assert a == pytest.approx(lam ** (n + delta - p) * b, rel=1e-10)


def _cap(K, G, e=E22, h_rel=1 / 32, w=None):
    return normalized_grid_capacity(Condenser(K, G, w or Weight.constant()), e, h_rel).value


@settings(max_examples=8)
@given(st.floats(0.1, 0.6), st.floats(0.05, 0.3))
def test_grid_capacity_monotone_in_K(r1, extra):
    G = Ball(O, 1.0)
    small = _cap(ClosedBall(O, r1), G)
    big = _cap(ClosedBall(O, min(r1 + extra, 0.9)), G)
    assert small <= big * (1 + 1e-9)


@settings(max_examples=6)
@given(st.floats(0.1, 0.3), st.floats(0.6, 0.95))
def test_grid_capacity_monotone_in_G(r, R):
    K = ClosedBall(O, r)
    grid = Grid.cube(1.05, 1 / 32, 2)
    a = grid_capacity(Condenser(K, Ball(O, R)), grid, E22).value
    b = grid_capacity(Condenser(K, Ball(O, 1.0)), grid, E22).value
    assert b <= a * (1 + 1e-9)


@pytest.mark.parametrize("p,delta", [(2.0, 0.0), (3.0, 2.0)])
def test_grid_scaling_exact(p, delta):
    e = Exponents(2, p)
    w = Weight.power(delta) if delta else Weight.constant()
    h = 1 / 32
    base = grid_capacity(Condenser(ClosedBall((0.2, 0), 0.3), Ball((0.2, 0), 0.8), w),
                         Grid.cube(1.0, h, 2), e).value
    lam = 3.0
    scaled = grid_capacity(Condenser(ClosedBall((0.6, 0), 0.9), Ball((0.6, 0), 2.4), w),
                           Grid.cube(3.0, h * lam, 2), e).value
    assert scaled == pytest.approx(lam ** (2 + delta - p) * base, rel=1e-8)


def test_subadditivity():
    G = Ball(O, 1.0)
    K1, K2 = ClosedBall((-0.4, 0), 0.15), ClosedBall((0.4, 0), 0.15)
    grid = Grid.cube(1.05, 1 / 64, 2)
    c1 = grid_capacity(Condenser(K1, G), grid, E22).value
    c2 = grid_capacity(Condenser(K2, G), grid, E22).value
    c12 = grid_capacity(Condenser(Union((K1, K2)), G), grid, E22).value
    assert max(c1, c2) <= c12 <= c1 + c2


def test_determinism_and_seeds():
    c = Condenser(ClosedBall(O, 0.5), Ball(O, 1.0))
    g = Grid.cube(1.05, 1 / 32, 2)
    a, b = grid_capacity(c, g, E22), grid_capacity(c, g, E22)
    assert a.value == b.value
    s = grid_capacity(c, g, E22, seed=7)
    assert s.value == pytest.approx(a.value, rel=1e-8)


def test_grid_convergence_towards_closed_form():
    exact = 2 * math.pi / math.log(2)
    c = Condenser(ClosedBall(O, 0.5), Ball(O, 1.0))
    errs = [abs(normalized_grid_capacity(c, E22, h).value / exact - 1) for h in (1 / 16, 1 / 64)]
    assert errs[1] < errs[0] and errs[1] < 0.03


def test_weighted_annulus_close_to_closed_form():
    e = Exponents(2, 3)
    c = Condenser(ClosedBall(O, 0.5), Ball(O, 1.0), Weight.power(2.0))
    est = normalized_grid_capacity(c, e, 1 / 128)
    exact = shell_capacity(0.5, 1.0, 2, 3.0, 2.0)
    assert est.analytic_bounds == pytest.approx((exact, exact))
    assert est.value == pytest.approx(exact, rel=0.05)


def test_K_outside_G_is_rejected():
    with pytest.raises(GeometryError):
        grid_capacity(Condenser(ClosedBall(O, 1.0), Ball(O, 0.5)), Grid.cube(1.1, 1 / 16, 2), E22)


def test_grid_budget():
    with pytest.raises(GridBudgetError):
        Grid.cube(1.0, 1e-4, 2)


def test_unbounded_G_via_truncation():
    # p < n: cap(closed B_r, R^2) = 2 pi sqrt(r) for p = 3/2
    e = Exponents(2, 1.5)
    est = truncated_capacity(ClosedBall(O, 0.5), WholeSpace(), e, Weight.constant(), 2.0,
                             h_rel=1 / 16, rel_change=0.03)
    assert est.converged
    assert est.value == pytest.approx(2 * math.pi * math.sqrt(0.5), rel=0.08)


def test_truncation_flags_unresolved_K():
    # p >= n: the capacity relative to R^n vanishes and K eventually falls between nodes
    est = truncated_capacity(ClosedBall(O, 0.01), WholeSpace(), Exponents(2, 3),
                             Weight.constant(), 0.5, h_rel=1 / 16)
    assert not est.converged


def test_ring_modulus():
    assert ring_capacity(2, ring_modulus(1, 2, 0, True)) == pytest.approx(2 * math.pi / math.log(2))


def test_split_bound():
    sb = annulus_split_bound(Annulus(0.5, 1, closed=True), 0.25, 0.5, 1, E22, h_rel=1 / 64)
    assert sb.holds and sb.lhs <= sb.rhs * 1.02
    with pytest.raises(DomainError):
        annulus_split_bound(Annulus(0.5, 1, closed=True), 0.5, 0.25, 1, E22)


def test_integrability_function_and_integral():
    assert corollary63_f(0.5, E22) == 0.5
    assert corollary63_f(0.5, Exponents(2, 3)) == pytest.approx(2.0 ** (-2))
    q, tail = integrability_integral(E22)
    assert q == pytest.approx(1.0, rel=1e-6) and tail >= 0
    q3, _ = integrability_integral(Exponents(2, 3))
    assert math.isfinite(q3) and q3 > 0


def test_duality_single_condenser():
    d = duality_check(ClosedBall((3, 0), 0.5), Ball((3, 0), 1.0), E22, h_rel=1 / 64)
    assert d.ratio == pytest.approx(1.0, abs=0.15)


def test_poincare_disk():
    c = poincare_constant_estimate(E22, Weight.constant(), Grid.cube(1.0, 1 / 32, 2))
    assert c == pytest.approx(1 / 2.404825557695773 ** 2, rel=0.05)


def test_shell_cut_constant_and_sandwich():
    assert lemma73_constant(0.25, 0.5, E22, 0.2) == pytest.approx(4 + 16 * 0.2 / 0.0625)
    res = shell_cut_sandwich(WholeSpace(), 1.0, 0.25, 0.5, E22, 0.1729, h_rel=1 / 64)
    assert res["lower_holds"] and res["upper_holds"]


@given(st.lists(st.floats(0, 100), min_size=1, max_size=10), st.floats(0.01, 1))
def test_power_sum(values, c):
    assert power_sum_holds(values, c)
