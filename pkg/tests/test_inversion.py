import numpy as np
import pytest
from hypothesis import given, strategies as st

from strategies import center, radius, set_trees
from wienerinf.geometry import Ball, ClosedBall, Exponents, Inverted, contains
from wienerinf.inversion import (INFINITY, ORIGIN, OperatorMap, OriginInsideBall,
                                 PushforwardMap, SingularPoint, dT_apply, invert_ball,
                                 invert_point, invert_points, invert_set, jacobian_det_abs,
                                 pushforward_eval, verify_ellipticity)


def random_points(seed, m, n):
    rng = np.random.default_rng(seed)
    return rng.normal(size=(m, n)) * np.exp(rng.uniform(-3, 3, size=(m, 1)))


@given(st.integers(0, 2 ** 16), st.sampled_from([2, 3, 4]))
def test_involution(seed, n):
    X = random_points(seed, 200, n)
    np.testing.assert_allclose(invert_points(invert_points(X)), X, rtol=1e-13)


@given(st.integers(0, 2 ** 16), st.sampled_from([2, 3]))
def test_differential_is_conformal(seed, n):
    X, Q = random_points(seed, 200, n), random_points(seed + 1, 200, n)
    r2 = np.sum(X * X, axis=1)
    np.testing.assert_allclose(np.linalg.norm(dT_apply(X, Q), axis=1),
                               np.linalg.norm(Q, axis=1) / r2, rtol=1e-12)
    # dT at T(x) undoes dT at x
    np.testing.assert_allclose(dT_apply(invert_points(X), dT_apply(X, Q)), Q, rtol=1e-10, atol=0)


@given(st.integers(0, 2 ** 16), st.sampled_from([2, 3]))
def test_jacobian_against_finite_differences(seed, n):
    x = random_points(seed, 1, n)[0]
    x = x / np.linalg.norm(x) * np.random.default_rng(seed).uniform(0.5, 2)
    eps = 1e-6
    D = np.stack([(invert_points((x + eps * e)[None]) - invert_points((x - eps * e)[None]))[0]
                  / (2 * eps) for e in np.eye(n)], axis=1)
    assert abs(np.linalg.det(D)) == pytest.approx(jacobian_det_abs(x), rel=1e-6)


def test_special_points():
    assert invert_point((0.0, 0.0)) is INFINITY
    assert invert_point(INFINITY, 2) == (0.0, 0.0)
    assert invert_point(ORIGIN) is INFINITY
    assert invert_point((2.0, 0.0)) == (0.5, 0.0)
    with pytest.raises(SingularPoint):
        dT_apply(np.zeros(2), np.ones(2))
    with pytest.raises(SingularPoint):
        jacobian_det_abs(np.zeros(3))


@given(center, radius)
def test_invert_ball_maps_sphere_to_sphere(c, r):
    b = ClosedBall(c, r)
    if np.hypot(*c) <= r * (1 + 1e-6):
        with pytest.raises(OriginInsideBall):
            invert_ball(b)
        return
    img = invert_ball(b)
    t = np.linspace(0, 2 * np.pi, 64)
    S = np.array(c) + r * np.stack([np.cos(t), np.sin(t)], axis=1)
    d = np.linalg.norm(invert_points(S) - np.array(img.center), axis=1)
    np.testing.assert_allclose(d, img.radius, rtol=1e-9)


@given(set_trees, st.integers(0, 2 ** 16))
def test_invert_set_agrees_with_inverted(S, seed):
    X = np.random.default_rng(seed).uniform(-3, 3, size=(500, 2))
    X = X[np.linalg.norm(X, axis=1) > 1e-9]
    a = contains(invert_set(S), X)
    b = contains(Inverted(S), X)
    # points on a boundary sphere may be decided differently by the two roundings
    assert np.mean(a != b) <= 0.002


def test_pushforward_of_p_laplace():
    rng = np.random.default_rng(0)
    for n in (2, 3):
        for p in (2.0, 2.5, 3.0):
            B = PushforwardMap(OperatorMap.p_laplace(Exponents(n, p)))
            xi, q = random_points(1, 1000, n), rng.normal(size=(1000, n))
            expect = (np.sum(xi * xi, 1) ** (p - n) * np.linalg.norm(q, axis=1) ** (p - 2))[:, None] * q
            np.testing.assert_allclose(pushforward_eval(B, xi, q), expect, rtol=1e-10)
    assert np.all(pushforward_eval(B, np.zeros((1, 3)), np.ones((1, 3))) == 0)


@pytest.mark.parametrize("n,p", [(2, 2.0), (2, 3.0), (3, 3.0), (3, 4.5)])
def test_ellipticity_transfer(n, p):
    e = Exponents(n, p)
    for A in (OperatorMap.p_laplace(e),
              OperatorMap.scalar(e, lambda x: 1.5 + 0.5 * np.sin(x[..., 0]), 1.0, 2.0)):
        rep = verify_ellipticity(PushforwardMap(A), 2000, seed=3)
        assert rep.passed and rep.coercivity_margin >= -1e-10 and rep.growth_margin >= -1e-10
