import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from strategies import set_trees
from wienerinf.expr import parse_expr
from wienerinf.geometry import (Annulus, Ball, BallSequence, BoundaryStatus, ClosedBall,
                                Complement, DomainError, HalfSpace, Intersection, Inverted,
                                Origin, SequenceUnion, Union, ValidationError, Weight,
                                WholeSpace, ball_volume, boundary_unbounded, contains,
                                membership, scale_set, sphere_area, weight_ball_mass)
from wienerinf.geometry import Exponents


def points(seed, m=400, scale=4.0):
    return np.random.default_rng(seed).uniform(-scale, scale, size=(m, 2))


@given(set_trees, st.integers(0, 2 ** 16))
def test_complement_membership_is_negation(S, seed):
    X = points(seed)
    assert np.array_equal(contains(Complement(S), X), ~contains(S, X))


@given(set_trees, set_trees, st.integers(0, 2 ** 16))
def test_union_and_intersection_are_pointwise(A, B, seed):
    X = points(seed)
    a, b = contains(A, X), contains(B, X)
    assert np.array_equal(contains(Union((A, B)), X), a | b)
    assert np.array_equal(contains(Intersection((A, B)), X), a & b)


@given(set_trees, st.floats(min_value=0.2, max_value=5), st.integers(0, 2 ** 16))
def test_scaling_commutes_with_membership(S, t, seed):
    X = points(seed)
    assert np.array_equal(contains(scale_set(S, t), t * X), contains(S, X))


def test_membership_examples():
    assert membership((0.5, 0.0), Ball((0, 0), 1))
    assert not membership((1.0, 0.0), Ball((0, 0), 1))
    assert membership((1.0, 0.0), ClosedBall((0, 0), 1))
    assert membership((0.0, 0.0), Origin())
    assert membership((2.0, 0.0), HalfSpace((1, 0), 1.0))
    assert not membership((0.5, 0.0), Annulus(1, 2))
    with pytest.raises(ValidationError):
        membership((0.0, 0.0), Ball((0, 0), 1), trunc=0)


def test_validation():
    with pytest.raises(ValidationError):
        Exponents(1, 2)
    with pytest.raises(ValidationError):
        Exponents(2, 1)
    with pytest.raises(ValidationError):
        Annulus(2, 1)
    with pytest.raises(ValidationError):
        HalfSpace((0, 0), 1)
    with pytest.raises(ValidationError):
        Exponents(3, 2).require_p_ge_n()


@pytest.mark.parametrize("S,status", [
    (Complement(ClosedBall((0, 0), 1)), BoundaryStatus.BOUNDED),
    (Ball((0, 0), 1), BoundaryStatus.BOUNDED),
    (HalfSpace((1, 0), 0.0), BoundaryStatus.UNBOUNDED),
    (Complement(Origin()), BoundaryStatus.BOUNDED),
    (Inverted(Ball((3, 0), 1)), BoundaryStatus.BOUNDED),
])
def test_boundary_unbounded(S, status):
    assert boundary_unbounded(S) is status


def test_constant_weight_mass_matches_volume():
    for n in (2, 3, 4):
        assert weight_ball_mass(Weight.constant(), 2.0, n) == pytest.approx(ball_volume(n, 2.0))
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


@given(st.integers(2, 4), st.floats(min_value=-1.5, max_value=4), st.floats(min_value=0.1, max_value=5))
def test_power_weight_mass_scales(n, delta, r):
    w = Weight.power(delta)
    m1, m2 = weight_ball_mass(w, r, n), weight_ball_mass(w, 2 * r, n)
    assert m2 / m1 == pytest.approx(2 ** (n + delta), rel=1e-12)


def test_power_weight_mass_against_quadrature():
    from scipy.integrate import quad
    w = Weight.power(2.0)
    q = quad(lambda t: 2 * math.pi * t * t ** 2, 0, 1.5)[0]
    assert weight_ball_mass(w, 1.5, 2) == pytest.approx(q, rel=1e-12)
    with pytest.raises(DomainError):
        weight_ball_mass(Weight.power(-2.0), 1.0, 2)


def test_weight_at_origin():
    assert Weight.power(2.0)(np.zeros((1, 2)))[0] == 0.0
    assert math.isinf(Weight.power(-1.0)(np.zeros((1, 2)))[0])
    assert Weight.power(-1.0).singular_at_origin


def test_sequence_generators_are_monotone():
    seq = BallSequence((parse_expr("0.75*pow2(4^j)"), parse_expr("0")), parse_expr("pow2(-(8^j))"))
    logs = [seq.log_center_norm(j) for j in range(1, 12)]
    rads = [seq.log_radius(j) for j in range(1, 12)]
    assert all(b > a for a, b in zip(logs, logs[1:]))
    assert all(b < a for a, b in zip(rads, rads[1:]))
    assert seq.on_ray() and seq.radius_below_center()
    U = SequenceUnion(seq, closed=True)
    assert membership((12.0, 0.0), U)
    assert membership((12.0 + 2 ** -8, 0.0), U)
    assert not membership((12.0 + 2 ** -7, 0.0), U)
    assert membership((0.75 * 2.0 ** 64, 0.0), U)
